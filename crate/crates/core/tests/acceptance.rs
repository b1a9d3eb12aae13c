//! Acceptance gate. Runs every criterion at its stated tolerance and time
//! budget and prints one PASS/FAIL line each; exits non-zero on any FAIL.
//!
//! Built with `harness = false` so the lines appear in plain `cargo test`
//! output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gp_core::gpc::{find_mode, log_probit, mode_residual, probit_average};
use gp_core::gplvm::{fit_lvm, lvm_gradients, lvm_log_likelihood};
use gp_core::gpr::{condition_gaussian, optimize_hyperparams};
use gp_core::kernels::parse_kernel_spec;
use gp_core::numerics::{dot, fd_gradient};
use gp_core::{
    BinaryGpcModel, CholFactor, GprModel, JitterPolicy, KernelExpr, KernelTerm, LvmConfig,
    LvmTheta, Matrix, MultiGpcModel, OptOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;

const TOY_X: [f64; 6] = [-1.50, -1.00, -0.75, -0.40, -0.25, 0.00];

/// The 6×6 covariance matrix as printed, two decimals.
const TOY_K: [[f64; 6]; 6] = [
    [1.70, 1.42, 1.21, 0.87, 0.72, 0.51],
    [1.42, 1.70, 1.56, 1.34, 1.21, 0.97],
    [1.21, 1.56, 1.70, 1.51, 1.42, 1.21],
    [0.87, 1.34, 1.51, 1.70, 1.59, 1.48],
    [0.72, 1.21, 1.42, 1.59, 1.70, 1.56],
    [0.51, 0.97, 1.21, 1.48, 1.56, 1.70],
];
const TOY_K_STAR: [f64; 6] = [0.38, 0.79, 1.03, 1.35, 1.46, 1.58];

fn toy_kernel() -> KernelExpr {
    KernelExpr::se_noise(1.27, 1.0, 0.3).unwrap()
}

fn se(sf: f64, l: f64) -> KernelExpr {
    KernelExpr::new(vec![KernelTerm::se(sf, l)]).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws `N(0, cov)` through its Cholesky factor.
fn sample_mvn(rng: &mut impl Rng, cov: &Matrix) -> Vec<f64> {
    let l = CholFactor::new(cov, &JitterPolicy::default()).unwrap();
    let z: Vec<f64> = (0..cov.rows()).map(|_| normal(rng)).collect();
    l.lower().mul_vec(&z).unwrap()
}

fn c1_gram_golden() -> Check {
    let k = toy_kernel();
    let xs = Matrix::column(&TOY_X);
    let gram = k.gram(&xs).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, row) in TOY_K.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((gram[(i, j)] - v).abs());
        }
    }
    ensure(worst <= 0.02, || format!("K off by {worst:.4}"))?;
    let x_star = Matrix::column(&[0.2]);
    let cross = k.cross(&xs, &x_star).map_err(|e| e.to_string())?;
    let worst_star = (0..6)
        .map(|j| (cross[(0, j)] - TOY_K_STAR[j]).abs())
        .fold(0.0, f64::max);
    ensure(worst_star <= 0.02, || format!("K* off by {worst_star:.4}"))?;
    let kss = k.test_covariance(&x_star).map_err(|e| e.to_string())?[(0, 0)];
    ensure((kss - 1.70).abs() <= 0.005, || format!("K** = {kss}"))?;
    Ok(format!(
        "max |ΔK| {worst:.4}, max |ΔK*| {worst_star:.4}, K** {kss:.4}"
    ))
}

fn c2_variance_golden() -> Check {
    let xs = Matrix::column(&TOY_X);
    let x_star = Matrix::column(&[0.2]);
    let mut vars = Vec::new();
    // The targets are unprinted; the variance must not depend on them.
    for y in [[0.0; 6], [-1.6, -1.1, -0.4, 0.1, 0.5, 0.8]] {
        let m = GprModel::fit(xs.clone(), y.to_vec(), toy_kernel()).map_err(|e| e.to_string())?;
        vars.push(m.predict(&x_star).map_err(|e| e.to_string())?.variance[0]);
    }
    ensure(vars[0] == vars[1], || {
        format!("variance depends on y: {vars:?}")
    })?;
    ensure((vars[0] - 0.21).abs() <= 0.02, || {
        format!("var(y*) = {}", vars[0])
    })?;
    Ok(format!("var(y*) = {:.4}", vars[0]))
}

fn c3_hyperparameter_fit() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = Matrix::column(&TOY_X);
    let template =
        parse_kernel_spec("se(sf=1.27,l=1)+noise(sn=0.3!)").map_err(|e| e.to_string())?;
    let prior = toy_kernel().gram(&xs).unwrap();
    let mut worst_gain = f64::INFINITY;
    for _ in 0..10 {
        let y = sample_mvn(&mut rng, &prior);
        let start = GprModel::fit(xs.clone(), y.clone(), template.clone())
            .map_err(|e| e.to_string())?
            .log_marginal_likelihood();
        let (best, lml) = optimize_hyperparams(&xs, &y, &template, &OptOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(best.noise_variance() == 0.09, || {
            format!("noise moved: {best}")
        })?;
        ensure(lml >= start - 1e-3, || {
            format!("log-ML {lml} below start {start}")
        })?;
        worst_gain = worst_gain.min(lml - start);
    }
    Ok(format!("10 prior draws, min log-ML gain {worst_gain:.3e}"))
}

fn random_kernel(rng: &mut impl Rng, noise: bool) -> KernelExpr {
    let mut terms = vec![KernelTerm::se(
        rng.random_range(0.5..2.0),
        rng.random_range(0.3..2.0),
    )];
    if noise {
        terms.push(KernelTerm::noise(rng.random_range(0.05..0.5)));
    }
    KernelExpr::new(terms).unwrap()
}

fn c4_conditioning_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=4);
        let d = rng.random_range(1..=2);
        let xs = Matrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0));
        let xt = Matrix::from_fn(m, d, |_, _| rng.random_range(-2.5..2.5));
        let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let k = random_kernel(&mut rng, true);

        let model = GprModel::fit(xs.clone(), y.clone(), k.clone()).map_err(|e| e.to_string())?;
        let (mean, cov) = model.predict_joint(&xt).map_err(|e| e.to_string())?;
        let pred = model.predict(&xt).map_err(|e| e.to_string())?;

        let a = k.gram(&xs).unwrap();
        let b = k.test_covariance(&xt).unwrap();
        let c = k.cross(&xs, &xt).unwrap();
        let (cm, ccov) = condition_gaussian(&y, &a, &b, &c).map_err(|e| e.to_string())?;
        let rel = |p: f64, q: f64| (p - q).abs() / p.abs().max(q.abs()).max(1.0);
        for i in 0..m {
            worst = worst.max(rel(cm[i], mean[i])).max(rel(cm[i], pred.mean[i]));
            worst = worst.max(rel(ccov[(i, i)], pred.variance[i]));
            for j in 0..m {
                worst = worst.max(rel(ccov[(i, j)], cov[(i, j)]));
            }
        }
    }
    ensure(worst < 1e-10, || format!("max discrepancy {worst:.3e}"))?;
    Ok(format!("100 problems, max discrepancy {worst:.2e}"))
}

fn log_posterior(k: &Matrix, y: &[f64; 2], f: [f64; 2]) -> f64 {
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let quad =
        (k[(1, 1)] * f[0] * f[0] - 2.0 * k[(0, 1)] * f[0] * f[1] + k[(0, 0)] * f[1] * f[1]) / det;
    -0.5 * quad + log_probit(y[0] * f[0]) + log_probit(y[1] * f[1])
}

/// Grid maximization of `g` over a square, refined twice around the best
/// point. Returns the argmax and the final spacing.
fn grid_argmax(g: impl Fn([f64; 2]) -> f64) -> ([f64; 2], f64) {
    let steps = 201;
    let (mut centre, mut half) = ([0.0, 0.0], 8.0);
    let mut h = 0.0;
    for _ in 0..3 {
        h = 2.0 * half / (steps - 1) as f64;
        let mut best = (f64::NEG_INFINITY, centre);
        for i in 0..steps {
            for j in 0..steps {
                let f = [
                    centre[0] - half + i as f64 * h,
                    centre[1] - half + j as f64 * h,
                ];
                let v = g(f);
                if v > best.0 {
                    best = (v, f);
                }
            }
        }
        centre = best.1;
        half = 10.0 * h;
    }
    (centre, h)
}

fn c5_gpc_mode_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for _ in 0..20 {
        let x0 = rng.random_range(-2.0..2.0);
        let x1 = x0 + rng.random_range(0.3..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let xs = Matrix::column(&[x0, x1]);
        let y = [
            if rng.random::<bool>() { 1.0 } else { -1.0 },
            if rng.random::<bool>() { 1.0 } else { -1.0 },
        ];
        // Same-label pairs are allowed here, so the mode finder is called
        // directly rather than through the fitted model.
        let k = random_kernel(&mut rng, false)
            .gram(&xs)
            .map_err(|e| e.to_string())?;
        let mode = find_mode(&k, &y).map_err(|e| e.to_string())?;
        let (best, h) = grid_argmax(|f| log_posterior(&k, &y, f));
        for d in 0..2 {
            let off = (mode.f_hat[d] - best[d]).abs();
            ensure(off <= h, || {
                format!("mode {:?} vs grid {best:?} (h = {h})", mode.f_hat)
            })?;
            worst_ratio = worst_ratio.max(off / h);
        }
        let r = mode_residual(&k, &y, &mode.f_hat).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(r);
    }
    // Residual on larger fitted models as well.
    for _ in 0..20 {
        let n = rng.random_range(3..40);
        let xs = Matrix::from_fn(n, 2, |_, _| rng.random_range(-3.0..3.0));
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                if xs[(i, 0)] + 0.5 * normal(&mut rng) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let kernel = random_kernel(&mut rng, false);
        let model = BinaryGpcModel::fit(xs, y.clone(), kernel).map_err(|e| e.to_string())?;
        let r = mode_residual(model.gram(), &y, model.f_hat()).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(r);
    }
    ensure(worst_residual < 1e-6, || {
        format!("mode residual {worst_residual:.3e}")
    })?;
    Ok(format!(
        "20 grid instances, max offset {worst_ratio:.2} grid steps; 40 models, max residual {worst_residual:.1e}"
    ))
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

/// `∫Φ(f)N(f; μ, v)df` by quadrature, with `Φ` from `erfc` directly.
fn probit_integral(mu: f64, v: f64) -> f64 {
    let sd = v.sqrt();
    let integrand = |f: f64| {
        let phi = 0.5 * libm::erfc(-f / std::f64::consts::SQRT_2);
        let z = (f - mu) / sd;
        phi * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    };
    simpson(&integrand, mu - 12.0 * sd, mu + 12.0 * sd, 1e-12)
}

fn c6_probit_identity() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..=24 {
        let mu = -3.0 + 0.25 * i as f64;
        for j in 0..=20 {
            // Log-spaced variances from 0.01 to 9.
            let v = 0.01 * (900.0f64).powf(j as f64 / 20.0);
            worst = worst.max((probit_average(mu, v) - probit_integral(mu, v)).abs());
            count += 1;
        }
    }
    // The same identity through a fitted model's predictions.
    let xs = Matrix::column(&[-2.7, -2.1, -1.5, -0.9, -0.3, 0.3, 0.9, 1.5, 2.1, 2.7]);
    let y = vec![-1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let model = BinaryGpcModel::fit(xs, y, se(2.0, 2.5)).map_err(|e| e.to_string())?;
    let xt = Matrix::column(&(0..41).map(|i| -4.0 + 0.2 * i as f64).collect::<Vec<_>>());
    let (m, v) = model.predict_latent(&xt).map_err(|e| e.to_string())?;
    let p = model.predict_prob(&xt).map_err(|e| e.to_string())?;
    for i in 0..xt.rows() {
        worst = worst.max((p[i] - probit_integral(m[i], v[i])).abs());
        count += 1;
    }
    ensure(worst < 1e-6, || format!("max error {worst:.3e}"))?;
    Ok(format!("{count} (μ, v) points, max error {worst:.1e}"))
}

fn c7_multiclass_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    // (dataset, point, binary probability, softmax probability of class 1)
    let mut disagreements: Vec<(usize, Vec<f64>, f64, f64)> = Vec::new();
    for set in 0..10 {
        let n = rng.random_range(8..25);
        let d = rng.random_range(1..=2);
        let xs = Matrix::from_fn(n, d, |_, _| rng.random_range(-3.0..3.0));
        let w: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                if dot(xs.row(i), &w) + 0.3 * normal(&mut rng) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let classes: Vec<usize> = y.iter().map(|v| usize::from(*v > 0.0)).collect();
        let kernel = random_kernel(&mut rng, false);
        let binary = BinaryGpcModel::fit(xs.clone(), y.clone(), kernel.clone())
            .map_err(|e| e.to_string())?;
        let multi = MultiGpcModel::fit(xs.clone(), classes, vec![kernel.clone(), kernel])
            .map_err(|e| e.to_string())?;
        let test = Matrix::from_fn(50, d, |_, _| rng.random_range(-3.5..3.5));
        for pts in [&xs, &test] {
            let pb = binary.predict_prob(pts).map_err(|e| e.to_string())?;
            let pm = multi.predict_proba(pts).map_err(|e| e.to_string())?;
            for (i, (b, m)) in pb.iter().zip(&pm).enumerate() {
                if (*b > 0.5) != (m[1] > m[0]) {
                    disagreements.push((set, pts.row(i).to_vec(), *b, m[1]));
                }
                checked += 1;
            }
        }
    }
    ensure(disagreements.is_empty(), || {
        let margin = disagreements
            .iter()
            .map(|(_, _, b, m)| (b - 0.5).abs().max((m - 0.5).abs()))
            .fold(0.0, f64::max);
        let (set, x, b, m) = &disagreements[0];
        format!(
            "argmax differs at {} of {checked} points, all within {margin:.3} of p = 0.5 \
             (first: dataset {set}, x = {x:.3?}, probit {b:.4}, softmax {m:.4}); \
             the C = 2 softmax mode is a logistic-link model with prior 2K, not the probit model",
            disagreements.len()
        )
    })?;
    Ok(format!("10 datasets, {checked} points agree"))
}

fn c8_lvm_gradients() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=8);
        let d = rng.random_range(2..=3);
        let q = rng.random_range(1..=2.min(d - 1));
        let x = Matrix::from_fn(n, q, |_, _| normal(&mut rng));
        let y = Matrix::from_fn(n, d, |_, _| normal(&mut rng));
        let theta = LvmTheta {
            sigma: rng.random_range(0.5..2.0),
            length: rng.random_range(0.5..2.0),
            beta: rng.random_range(2.0..50.0),
        };
        let g = lvm_gradients(&x, &theta, &y).map_err(|e| e.to_string())?;
        let mut analytic = g.x.into_vec();
        analytic.extend(g.log_theta);
        let mut point = x.as_slice().to_vec();
        point.extend(theta.to_log());
        let objective = |v: &[f64]| {
            let xv = Matrix::from_row_slice(n, q, &v[..n * q]).unwrap();
            let t = LvmTheta::from_log([v[n * q], v[n * q + 1], v[n * q + 2]]);
            lvm_log_likelihood(&xv, &t, &y).unwrap_or(f64::NAN)
        };
        let fd = fd_gradient(objective, &point, None).map_err(|e| e.to_string())?;
        for (a, b) in analytic.iter().zip(&fd) {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-8));
        }
    }
    ensure(worst < 1e-5, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("20 instances, max relative error {worst:.1e}"))
}

fn c9_lvm_separation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let centres = [
        [2.0, 0.0, -1.0, 1.0],
        [-2.0, 1.5, 1.0, 0.0],
        [0.0, -2.0, 0.5, -1.5],
    ];
    let per = 10;
    let n = per * centres.len();
    let labels: Vec<usize> = (0..n).map(|i| i / per).collect();
    let y = Matrix::from_fn(n, 4, |i, j| centres[labels[i]][j] + 0.4 * normal(&mut rng));
    let config = LvmConfig {
        q: 2,
        seed: 9,
        ..LvmConfig::default()
    };
    let model = fit_lvm(&y, &config).map_err(|e| e.to_string())?;
    let x = &model.x_latent;
    let centroids: Vec<[f64; 2]> = (0..3)
        .map(|c| {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            let k = members.len() as f64;
            [
                members.iter().map(|&i| x[(i, 0)]).sum::<f64>() / k,
                members.iter().map(|&i| x[(i, 1)]).sum::<f64>() / k,
            ]
        })
        .collect();
    let hits = (0..n)
        .filter(|&i| {
            let dist = |c: &[f64; 2]| (x[(i, 0)] - c[0]).powi(2) + (x[(i, 1)] - c[1]).powi(2);
            let nearest = (0..3)
                .min_by(|&a, &b| dist(&centroids[a]).total_cmp(&dist(&centroids[b])))
                .unwrap();
            nearest == labels[i]
        })
        .count();
    let purity = hits as f64 / n as f64;
    ensure(model.log_likelihood >= model.history[0], || {
        "likelihood decreased".into()
    })?;
    ensure(purity >= 0.9, || format!("purity {purity:.3}"))?;
    Ok(format!(
        "purity {purity:.3}, log-lik {:.2} -> {:.2} in {} iterations",
        model.history[0], model.log_likelihood, model.iterations
    ))
}

fn c10_calibration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (n_train, n_test) = (40, 200);
    let sn = 0.3;
    let latent = se(1.0, 1.0);
    let all: Vec<f64> = (0..n_train + n_test)
        .map(|_| rng.random_range(-4.0..4.0))
        .collect();
    let xs_all = Matrix::column(&all);
    let f = sample_mvn(&mut rng, &latent.gram(&xs_all).unwrap());
    let y: Vec<f64> = f.iter().map(|v| v + sn * normal(&mut rng)).collect();

    let xs = Matrix::column(&all[..n_train]);
    let xt = Matrix::column(&all[n_train..]);
    let model = GprModel::fit(
        xs,
        y[..n_train].to_vec(),
        KernelExpr::se_noise(1.0, 1.0, sn).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let (lo, hi) = model.predict(&xt).map_err(|e| e.to_string())?.band(1.96);
    let covered = (0..n_test)
        .filter(|&i| lo[i] <= y[n_train + i] && y[n_train + i] <= hi[i])
        .count();
    let coverage = covered as f64 / n_test as f64;
    ensure((0.90..=0.99).contains(&coverage), || {
        format!("coverage {coverage:.3}")
    })?;
    Ok(format!("coverage {coverage:.3} ({covered}/{n_test})"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let ms = Duration::from_millis;
    let s = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "Gram matrix golden",
            budget: ms(1),
            run: c1_gram_golden,
        },
        Criterion {
            id: 2,
            name: "predictive variance golden",
            budget: ms(1),
            run: c2_variance_golden,
        },
        Criterion {
            id: 3,
            name: "hyperparameter fit never worse",
            budget: s(5),
            run: c3_hyperparameter_fit,
        },
        Criterion {
            id: 4,
            name: "Gaussian conditioning oracle",
            budget: s(1),
            run: c4_conditioning_oracle,
        },
        Criterion {
            id: 5,
            name: "binary GPC mode oracle",
            budget: s(10),
            run: c5_gpc_mode_oracle,
        },
        Criterion {
            id: 6,
            name: "probit integral identity",
            budget: s(5),
            run: c6_probit_identity,
        },
        Criterion {
            id: 7,
            name: "two-class softmax matches binary",
            budget: s(30),
            run: c7_multiclass_consistency,
        },
        Criterion {
            id: 8,
            name: "GP-LVM gradient check",
            budget: s(10),
            run: c8_lvm_gradients,
        },
        Criterion {
            id: 9,
            name: "GP-LVM cluster separation",
            budget: s(60),
            run: c9_lvm_separation,
        },
        Criterion {
            id: 10,
            name: "95% band calibration",
            budget: s(5),
            run: c10_calibration,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over time budget")),
            Err(e) => ("FAIL", e),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "{verdict} [{:>2}] {}: {detail} ({:.3?} of {:?})",
            c.id, c.name, elapsed, c.budget
        );
    }
    println!(
        "SKIP [11] excluded: exact predictive mean, exact GP-LVM θ and the unprinted figure data are not asserted"
    );
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}

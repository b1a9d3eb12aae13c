//! Gaussian-process classification with the Laplace approximation.
//!
//! Binary classification uses the probit likelihood `p(y|f) = Φ(y·f)` with
//! labels `±1`. Multi-class classification stacks one latent function per
//! class and squashes with the softmax. Classifier kernels must not carry a
//! noise term.
//!
//! `Φ` is evaluated as `½·erfc(−f/√2)` using `libm::erfc`, the fdlibm
//! rational approximations, which are accurate to about one ulp. Deep in the
//! lower tail (`f < −35`) the logarithm and the ratio `φ/Φ` switch to the
//! asymptotic Mills-ratio series.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

use crate::gpr::LOG_BOUND;
use crate::kernels::{KernelError, KernelExpr};
use crate::numerics::{dot, norm_inf, CholFactor, JitterPolicy, Matrix, NumericsError};
use crate::optimize::{nelder_mead, OptError, OptOptions};

/// Newton iteration cap for the binary mode.
pub const MAX_NEWTON_ITERS: usize = 50;
/// Binary convergence: `‖Δf‖∞` below this.
pub const NEWTON_TOL: f64 = 1e-9;
/// Iteration cap for the multi-class fixed point.
pub const MAX_MULTI_ITERS: usize = 200;
/// Multi-class convergence: `‖K(y − π) − f‖∞` below this.
pub const MULTI_TOL: f64 = 1e-8;

const MAX_HALVINGS: usize = 60;
const TAIL: f64 = -35.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpcError {
    #[error("no training data")]
    EmptyData,
    #[error("training data contains non-finite values")]
    NonFinite,
    #[error("{inputs} inputs but {labels} labels")]
    LengthMismatch { inputs: usize, labels: usize },
    #[error("binary labels must be -1 or +1, got {0}")]
    InvalidLabel(f64),
    #[error("label {label} out of range for {classes} classes")]
    InvalidClass { label: usize, classes: usize },
    #[error("row {0} of the one-hot targets is not a unit vector")]
    InvalidOneHot(usize),
    #[error("training data must contain at least two classes")]
    SingleClassData,
    #[error("classifier kernels must not include a noise term")]
    NoiseTermNotAllowed,
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mode search did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("kernel has no free hyperparameters to optimize")]
    NoFreeParams,
    #[error("log marginal likelihood is not finite anywhere the optimizer looked")]
    OptimizerDiverged,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Optimizer(#[from] OptError),
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `1 − 1/z² + 3/z⁴ − 15/z⁶ + 105/z⁸`, so that `Φ(z) ≈ φ(z)·series/(−z)`.
fn mills_series(z: f64) -> f64 {
    let u = 1.0 / (z * z);
    1.0 - u * (1.0 - u * (3.0 - u * (15.0 - u * 105.0)))
}

/// Standard normal CDF.
pub fn probit(f: f64) -> f64 {
    0.5 * libm::erfc(-f / SQRT_2)
}

/// `log Φ(z)`, finite for every finite `z`.
pub fn log_probit(z: f64) -> f64 {
    if z < TAIL {
        -0.5 * z * z - 0.5 * (2.0 * PI).ln() - (-z).ln() + mills_series(z).ln()
    } else if z > 0.0 {
        (-0.5 * libm::erfc(z / SQRT_2)).ln_1p()
    } else {
        probit(z).ln()
    }
}

/// `φ(z)/Φ(z)`, the derivative of `log Φ(z)`.
pub fn probit_ratio(z: f64) -> f64 {
    if z < TAIL {
        -z / mills_series(z)
    } else {
        normal_pdf(z) / probit(z)
    }
}

/// `∫Φ(f)·N(f; mean, var) df = Φ(mean/√(1 + var))`.
pub fn probit_average(mean: f64, var: f64) -> f64 {
    probit(mean / (1.0 + var).sqrt())
}

/// Softmax with max subtraction.
pub fn softmax(f: &[f64]) -> Vec<f64> {
    let m = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = f.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_sum_exp(f: &[f64]) -> f64 {
    let m = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + f.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn check_square(k: &Matrix, n: usize) -> Result<(), GpcError> {
    if !k.is_square() || k.rows() != n {
        return Err(GpcError::DimensionMismatch {
            expected: n,
            got: k.rows(),
        });
    }
    Ok(())
}

/// Binary Laplace mode and the quantities derived from it.
#[derive(Debug, Clone)]
pub struct BinaryMode {
    pub f_hat: Vec<f64>,
    /// `K⁻¹f̂`, maintained so that `f̂ = K·a` exactly.
    pub a: Vec<f64>,
    /// Diagonal of `W = −∇∇log p(y|f̂)`.
    pub w_diag: Vec<f64>,
    /// Factor of `B = I + W^½·K·W^½`.
    pub chol_b: CholFactor,
    pub iterations: usize,
    /// Log posterior (up to a constant) after each accepted step, starting
    /// at `f = 0`.
    pub history: Vec<f64>,
    /// `‖f̂ − K∇log p(y|f̂)‖∞`.
    pub residual: f64,
}

struct ProbitTerms {
    grad: Vec<f64>,
    w: Vec<f64>,
}

fn probit_terms(y: &[f64], f: &[f64]) -> ProbitTerms {
    let mut grad = Vec::with_capacity(f.len());
    let mut w = Vec::with_capacity(f.len());
    for (&yi, &fi) in y.iter().zip(f) {
        let z = yi * fi;
        let r = probit_ratio(z);
        grad.push(yi * r);
        w.push(r * (r + z));
    }
    ProbitTerms { grad, w }
}

fn binary_objective(y: &[f64], a: &[f64], f: &[f64]) -> f64 {
    let ll: f64 = y.iter().zip(f).map(|(yi, fi)| log_probit(yi * fi)).sum();
    -0.5 * dot(a, f) + ll
}

fn factor_b(k: &Matrix, sw: &[f64]) -> Result<CholFactor, GpcError> {
    let n = sw.len();
    let b = Matrix::from_fn(n, n, |i, j| {
        let v = sw[i] * k[(i, j)] * sw[j];
        if i == j {
            1.0 + v
        } else {
            v
        }
    });
    Ok(CholFactor::new(&b, &JitterPolicy::default())?)
}

fn validate_binary_labels(y: &[f64]) -> Result<(), GpcError> {
    match y.iter().find(|v| **v != 1.0 && **v != -1.0) {
        Some(v) => Err(GpcError::InvalidLabel(*v)),
        None => Ok(()),
    }
}

/// Newton search for the mode of `log p(y|f) + log p(f)` starting at
/// `f = 0`, halving the step whenever the log posterior would drop.
///
/// Each step solves with `B = I + W^½KW^½`, which stays well conditioned
/// even when `K` is nearly singular.
pub fn find_mode(k: &Matrix, y: &[f64]) -> Result<BinaryMode, GpcError> {
    let n = y.len();
    check_square(k, n)?;
    validate_binary_labels(y)?;
    if !k.is_finite() {
        return Err(GpcError::NonFinite);
    }

    let mut a = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut psi = binary_objective(y, &a, &f);
    let mut history = vec![psi];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_NEWTON_ITERS {
        iterations += 1;
        let t = probit_terms(y, &f);
        let sw: Vec<f64> = t.w.iter().map(|w| w.sqrt()).collect();
        let chol_b = factor_b(k, &sw)?;
        let b: Vec<f64> = (0..n).map(|i| t.w[i] * f[i] + t.grad[i]).collect();
        let kb = k.mul_vec(&b)?;
        let swkb: Vec<f64> = (0..n).map(|i| sw[i] * kb[i]).collect();
        let c = chol_b.solve_vec(&swkb)?;
        let a_newton: Vec<f64> = (0..n).map(|i| b[i] - sw[i] * c[i]).collect();

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let a_try: Vec<f64> = (0..n).map(|i| a[i] + step * (a_newton[i] - a[i])).collect();
            let f_try = k.mul_vec(&a_try)?;
            let psi_try = binary_objective(y, &a_try, &f_try);
            if psi_try >= psi {
                accepted = Some((a_try, f_try, psi_try));
                break;
            }
            step *= 0.5;
        }
        let Some((a_new, f_new, psi_new)) = accepted else {
            // No step improves the objective at working precision; the
            // residual check below decides whether that is the mode.
            converged = true;
            break;
        };
        let change = f_new
            .iter()
            .zip(&f)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        a = a_new;
        f = f_new;
        psi = psi_new;
        history.push(psi);
        if change < NEWTON_TOL {
            converged = true;
            break;
        }
    }

    let t = probit_terms(y, &f);
    let kg = k.mul_vec(&t.grad)?;
    let residual = f
        .iter()
        .zip(&kg)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if !converged || residual.is_nan() || residual >= 1e-6 {
        return Err(GpcError::NoConvergence {
            iterations,
            residual,
        });
    }
    let sw: Vec<f64> = t.w.iter().map(|w| w.sqrt()).collect();
    let chol_b = factor_b(k, &sw)?;
    Ok(BinaryMode {
        f_hat: f,
        a,
        w_diag: t.w,
        chol_b,
        iterations,
        history,
        residual,
    })
}

fn binary_log_ml(y: &[f64], mode: &BinaryMode) -> f64 {
    let ll: f64 = y
        .iter()
        .zip(&mode.f_hat)
        .map(|(y, f)| log_probit(y * f))
        .sum();
    -0.5 * dot(&mode.a, &mode.f_hat) + ll - 0.5 * mode.chol_b.log_det()
}

/// A fitted binary probit classifier.
#[derive(Debug, Clone)]
pub struct BinaryGpcModel {
    xs: Matrix,
    y: Vec<f64>,
    kernel: KernelExpr,
    k: Matrix,
    mode: BinaryMode,
}

fn validate_inputs(xs: &Matrix, n_labels: usize) -> Result<(), GpcError> {
    if xs.rows() == 0 || n_labels == 0 {
        return Err(GpcError::EmptyData);
    }
    if xs.rows() != n_labels {
        return Err(GpcError::LengthMismatch {
            inputs: xs.rows(),
            labels: n_labels,
        });
    }
    if !xs.is_finite() {
        return Err(GpcError::NonFinite);
    }
    Ok(())
}

/// Runs Nelder-Mead over the free log-parameters of `template`, scoring
/// each point with `score` (failures and out-of-bounds points score `−∞`).
fn optimize_logs<S>(start: &[f64], opts: &OptOptions, mut score: S) -> Result<Vec<f64>, GpcError>
where
    S: FnMut(&[f64]) -> Option<f64>,
{
    if start.is_empty() {
        return Err(GpcError::NoFreeParams);
    }
    let objective = |logs: &[f64]| -> f64 {
        if logs.iter().any(|v| v.abs() > LOG_BOUND) {
            return f64::NAN;
        }
        score(logs).unwrap_or(f64::NAN)
    };
    let x0: Vec<f64> = start
        .iter()
        .map(|v| v.clamp(-LOG_BOUND, LOG_BOUND))
        .collect();
    match nelder_mead(objective, &x0, opts) {
        Ok(r) => Ok(r.x),
        Err(OptError::NonFiniteStart) => Err(GpcError::OptimizerDiverged),
        Err(e) => Err(e.into()),
    }
}

impl BinaryGpcModel {
    /// Fits the mode under `kernel` without touching its hyperparameters.
    pub fn fit(xs: Matrix, y: Vec<f64>, kernel: KernelExpr) -> Result<Self, GpcError> {
        validate_inputs(&xs, y.len())?;
        validate_binary_labels(&y)?;
        if !(y.contains(&1.0) && y.contains(&-1.0)) {
            return Err(GpcError::SingleClassData);
        }
        if kernel.has_noise() {
            return Err(GpcError::NoiseTermNotAllowed);
        }
        let k = kernel.gram(&xs)?;
        let mode = find_mode(&k, &y)?;
        Ok(Self {
            xs,
            y,
            kernel,
            k,
            mode,
        })
    }

    pub fn xs(&self) -> &Matrix {
        &self.xs
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn kernel(&self) -> &KernelExpr {
        &self.kernel
    }

    pub fn gram(&self) -> &Matrix {
        &self.k
    }

    pub fn mode(&self) -> &BinaryMode {
        &self.mode
    }

    pub fn f_hat(&self) -> &[f64] {
        &self.mode.f_hat
    }

    pub fn w_diag(&self) -> &[f64] {
        &self.mode.w_diag
    }

    /// Latent predictive mean `K*K⁻¹f̂` and variance `K** − K*(K + W⁻¹)⁻¹K*ᵀ`.
    ///
    /// `(K + W⁻¹)⁻¹ = W^½B⁻¹W^½`, so the variance is `k** − ‖L_B⁻¹(W^½k*)‖²`.
    pub fn predict_latent(&self, xs_test: &Matrix) -> Result<(Vec<f64>, Vec<f64>), GpcError> {
        if xs_test.cols() != self.xs.cols() {
            return Err(GpcError::DimensionMismatch {
                expected: self.xs.cols(),
                got: xs_test.cols(),
            });
        }
        let ks = self.kernel.cross(&self.xs, xs_test)?;
        let kss = self.kernel.self_variance(xs_test)?;
        let sw: Vec<f64> = self.mode.w_diag.iter().map(|w| w.sqrt()).collect();
        let mut mean = Vec::with_capacity(ks.rows());
        let mut var = Vec::with_capacity(ks.rows());
        for (i, prior) in kss.into_iter().enumerate() {
            let row = ks.row(i);
            mean.push(dot(row, &self.mode.a));
            let scaled: Vec<f64> = row.iter().zip(&sw).map(|(k, s)| k * s).collect();
            let v = self.mode.chol_b.solve_lower_vec(&scaled)?;
            var.push((prior - dot(&v, &v)).max(0.0));
        }
        Ok((mean, var))
    }

    /// `P(y* = +1)` averaged over the latent predictive distribution.
    pub fn predict_prob(&self, xs_test: &Matrix) -> Result<Vec<f64>, GpcError> {
        let (mean, var) = self.predict_latent(xs_test)?;
        Ok(mean
            .iter()
            .zip(&var)
            .map(|(m, v)| probit_average(*m, *v))
            .collect())
    }

    /// Laplace log marginal likelihood
    /// `−½f̂ᵀK⁻¹f̂ + Σ log Φ(yᵢf̂ᵢ) − ½log|I + KW|`, with
    /// `|I + KW| = |B|`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        binary_log_ml(&self.y, &self.mode)
    }
}

/// Fits a binary classifier. With `optimize` set, the free log-parameters
/// of `template` are first tuned by Nelder-Mead on the Laplace log marginal
/// likelihood.
pub fn fit_binary(
    xs: Matrix,
    labels: Vec<f64>,
    template: KernelExpr,
    optimize: Option<&OptOptions>,
) -> Result<BinaryGpcModel, GpcError> {
    let first = BinaryGpcModel::fit(xs, labels, template)?;
    let Some(opts) = optimize else {
        return Ok(first);
    };
    let start = first.kernel.pack().values;
    let best = optimize_logs(&start, opts, |logs| {
        let kernel = first.kernel.with_log_params(logs).ok()?;
        let k = kernel.gram(&first.xs).ok()?;
        let mode = find_mode(&k, &first.y).ok()?;
        Some(binary_log_ml(&first.y, &mode))
    })?;
    let kernel = first.kernel.with_log_params(&best)?;
    BinaryGpcModel::fit(first.xs, first.y, kernel)
}

/// Multi-class Laplace mode, stacked class-major: index `c·n + i`.
#[derive(Debug, Clone)]
pub struct MultiMode {
    pub f_hat: Vec<f64>,
    pub pi_hat: Vec<f64>,
    /// Block-wise `K⁻¹f̂`; equals `y − π̂` at the fixed point.
    pub a: Vec<f64>,
    pub iterations: usize,
    /// Log posterior (up to a constant) after each accepted step.
    pub history: Vec<f64>,
    /// `‖K(y − π̂) − f̂‖∞`.
    pub residual: f64,
}

fn softmax_stacked(f: &[f64], n: usize, c: usize) -> (Vec<f64>, f64) {
    let mut pi = vec![0.0; c * n];
    let mut lse_sum = 0.0;
    let mut point = vec![0.0; c];
    for i in 0..n {
        for (cc, p) in point.iter_mut().enumerate() {
            *p = f[cc * n + i];
        }
        lse_sum += log_sum_exp(&point);
        for (cc, p) in softmax(&point).into_iter().enumerate() {
            pi[cc * n + i] = p;
        }
    }
    (pi, lse_sum)
}

fn block_mul(ks: &[Matrix], v: &[f64]) -> Result<Vec<f64>, GpcError> {
    let n = ks[0].rows();
    let mut out = Vec::with_capacity(v.len());
    for (c, k) in ks.iter().enumerate() {
        out.extend(k.mul_vec(&v[c * n..(c + 1) * n])?);
    }
    Ok(out)
}

fn multi_objective(y: &[f64], a: &[f64], f: &[f64], n: usize, c: usize) -> f64 {
    let (_, lse_sum) = softmax_stacked(f, n, c);
    -0.5 * dot(a, f) + dot(y, f) - lse_sum
}

fn validate_one_hot(y: &[f64], n: usize, c: usize) -> Result<(), GpcError> {
    for i in 0..n {
        let mut sum = 0.0;
        for cc in 0..c {
            let v = y[cc * n + i];
            if v != 0.0 && v != 1.0 {
                return Err(GpcError::InvalidOneHot(i));
            }
            sum += v;
        }
        if sum != 1.0 {
            return Err(GpcError::InvalidOneHot(i));
        }
    }
    Ok(())
}

/// Damped fixed-point search for `f̂ = K(y − π̂)`.
///
/// Iterates on `a` with `f = K·a`: the proposal `a + s·(y − π − a)` is the
/// literal update when `s = 1`. Each iteration starts from `s = 1` and
/// halves `s` while the log posterior is already falling at the trial point,
/// i.e. while the step overshoots the maximum along its ray.
pub fn find_mode_multi(ks: &[Matrix], y_onehot: &[f64]) -> Result<MultiMode, GpcError> {
    let c = ks.len();
    if c == 0 {
        return Err(GpcError::EmptyData);
    }
    let n = ks[0].rows();
    for k in ks {
        check_square(k, n)?;
        if !k.is_finite() {
            return Err(GpcError::NonFinite);
        }
    }
    if y_onehot.len() != c * n {
        return Err(GpcError::DimensionMismatch {
            expected: c * n,
            got: y_onehot.len(),
        });
    }
    validate_one_hot(y_onehot, n, c)?;

    let mut a = vec![0.0; c * n];
    let mut f = vec![0.0; c * n];
    let mut psi = multi_objective(y_onehot, &a, &f, n, c);
    let mut history = vec![psi];
    let mut iterations = 0;
    let mut residual;

    loop {
        let (pi, _) = softmax_stacked(&f, n, c);
        let target: Vec<f64> = y_onehot.iter().zip(&pi).map(|(y, p)| y - p).collect();
        let k_target = block_mul(ks, &target)?;
        residual = k_target
            .iter()
            .zip(&f)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        if residual < MULTI_TOL {
            return Ok(MultiMode {
                f_hat: f,
                pi_hat: pi,
                a,
                iterations,
                history,
                residual,
            });
        }
        if iterations == MAX_MULTI_ITERS || residual.is_nan() {
            break;
        }
        iterations += 1;

        // K·(target − a): the ascent direction mapped into f-space.
        let k_dir: Vec<f64> = k_target.iter().zip(&f).map(|(p, q)| p - q).collect();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let a_try: Vec<f64> = a
                .iter()
                .zip(&target)
                .map(|(ai, ti)| ai + step * (ti - ai))
                .collect();
            let f_try = block_mul(ks, &a_try)?;
            // Ψ is concave along the ray, so a non-negative slope at the
            // trial point means it has not overshot and Ψ has increased.
            let (pi_try, _) = softmax_stacked(&f_try, n, c);
            let slope: f64 = (0..c * n)
                .map(|j| k_dir[j] * (y_onehot[j] - pi_try[j] - a_try[j]))
                .sum();
            if slope >= 0.0 {
                let psi_try = multi_objective(y_onehot, &a_try, &f_try, n, c);
                accepted = Some((a_try, f_try, psi_try));
                break;
            }
            step *= 0.5;
        }
        let Some((a_new, f_new, psi_new)) = accepted else {
            break;
        };
        a = a_new;
        f = f_new;
        psi = psi_new;
        history.push(psi);
    }
    Err(GpcError::NoConvergence {
        iterations,
        residual,
    })
}

/// A fitted softmax classifier with one latent GP per class.
#[derive(Debug, Clone)]
pub struct MultiGpcModel {
    xs: Matrix,
    labels: Vec<usize>,
    kernels: Vec<KernelExpr>,
    /// Per-class Gram matrices, jitter included.
    ks: Vec<Matrix>,
    chols: Vec<CholFactor>,
    mode: MultiMode,
    /// Per-class factor of `I + Wᶜ^½KᶜWᶜ^½`, `Wᶜ = diag(πᶜ(1 − πᶜ))`.
    class_b: Vec<CholFactor>,
}

/// One-hot targets stacked class-major.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Vec<f64>, GpcError> {
    let n = labels.len();
    let mut y = vec![0.0; classes * n];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(GpcError::InvalidClass { label: l, classes });
        }
        y[l * n + i] = 1.0;
    }
    Ok(y)
}

fn class_grams(
    xs: &Matrix,
    kernels: &[KernelExpr],
) -> Result<(Vec<Matrix>, Vec<CholFactor>), GpcError> {
    let mut ks = Vec::with_capacity(kernels.len());
    let mut chols = Vec::with_capacity(kernels.len());
    for kernel in kernels {
        let mut k = kernel.gram(xs)?;
        let chol = CholFactor::new(&k, &JitterPolicy::default())?;
        for i in 0..k.rows() {
            k[(i, i)] += chol.jitter_applied();
        }
        ks.push(k);
        chols.push(chol);
    }
    Ok((ks, chols))
}

impl MultiGpcModel {
    /// Fits the mode with one kernel per class; `labels[i] < kernels.len()`.
    pub fn fit(xs: Matrix, labels: Vec<usize>, kernels: Vec<KernelExpr>) -> Result<Self, GpcError> {
        validate_inputs(&xs, labels.len())?;
        let c = kernels.len();
        if c < 2 {
            return Err(GpcError::SingleClassData);
        }
        if kernels.iter().any(KernelExpr::has_noise) {
            return Err(GpcError::NoiseTermNotAllowed);
        }
        let y = one_hot(&labels, c)?;
        if labels.iter().all(|l| *l == labels[0]) {
            return Err(GpcError::SingleClassData);
        }
        let (ks, chols) = class_grams(&xs, &kernels)?;
        let mode = find_mode_multi(&ks, &y)?;
        let n = xs.rows();
        let mut class_b = Vec::with_capacity(c);
        for (cc, k) in ks.iter().enumerate() {
            let sw: Vec<f64> = mode.pi_hat[cc * n..(cc + 1) * n]
                .iter()
                .map(|p| (p * (1.0 - p)).sqrt())
                .collect();
            class_b.push(factor_b(k, &sw)?);
        }
        Ok(Self {
            xs,
            labels,
            kernels,
            ks,
            chols,
            mode,
            class_b,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.kernels.len()
    }

    pub fn xs(&self) -> &Matrix {
        &self.xs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn kernels(&self) -> &[KernelExpr] {
        &self.kernels
    }

    pub fn mode(&self) -> &MultiMode {
        &self.mode
    }

    pub fn f_hat(&self) -> &[f64] {
        &self.mode.f_hat
    }

    pub fn pi_hat(&self) -> &[f64] {
        &self.mode.pi_hat
    }

    /// `Π`: the `Cn×n` vertical stack of `diag(πᶜ)`.
    pub fn pi_matrix(&self) -> Matrix {
        let n = self.xs.rows();
        let c = self.num_classes();
        let mut p = Matrix::zeros(c * n, n);
        for cc in 0..c {
            for i in 0..n {
                p[(cc * n + i, i)] = self.mode.pi_hat[cc * n + i];
            }
        }
        p
    }

    /// `W = diag(π) − ΠΠᵀ`.
    pub fn w_matrix(&self) -> Matrix {
        let p = self.pi_matrix();
        let ppt = p.matmul(&p.transpose()).expect("conformable");
        Matrix::from_diagonal(&self.mode.pi_hat)
            .add_scaled(&ppt, -1.0)
            .expect("conformable")
    }

    fn check_test(&self, xs_test: &Matrix) -> Result<(), GpcError> {
        if xs_test.cols() != self.xs.cols() {
            return Err(GpcError::DimensionMismatch {
                expected: self.xs.cols(),
                got: xs_test.cols(),
            });
        }
        Ok(())
    }

    /// Latent mean `K*ᶜ(Kᶜ)⁻¹f̂ᶜ` and variance
    /// `K**ᶜ − K*ᶜ(Kᶜ + (Wᶜ)⁻¹)⁻¹K*ᶜᵀ` for one class.
    pub fn predict_latent(
        &self,
        xs_test: &Matrix,
        class: usize,
    ) -> Result<(Vec<f64>, Vec<f64>), GpcError> {
        self.check_test(xs_test)?;
        let c = self.num_classes();
        if class >= c {
            return Err(GpcError::InvalidClass {
                label: class,
                classes: c,
            });
        }
        let n = self.xs.rows();
        let kernel = &self.kernels[class];
        let ks = kernel.cross(&self.xs, xs_test)?;
        let kss = kernel.self_variance(xs_test)?;
        let a = &self.mode.a[class * n..(class + 1) * n];
        let sw: Vec<f64> = self.mode.pi_hat[class * n..(class + 1) * n]
            .iter()
            .map(|p| (p * (1.0 - p)).sqrt())
            .collect();
        let mut mean = Vec::with_capacity(ks.rows());
        let mut var = Vec::with_capacity(ks.rows());
        for (i, prior) in kss.into_iter().enumerate() {
            let row = ks.row(i);
            mean.push(dot(row, a));
            let scaled: Vec<f64> = row.iter().zip(&sw).map(|(k, s)| k * s).collect();
            let v = self.class_b[class].solve_lower_vec(&scaled)?;
            var.push((prior - dot(&v, &v)).max(0.0));
        }
        Ok((mean, var))
    }

    /// Class probabilities per test point: softmax of the latent means.
    pub fn predict_proba(&self, xs_test: &Matrix) -> Result<Vec<Vec<f64>>, GpcError> {
        self.check_test(xs_test)?;
        let c = self.num_classes();
        let means = (0..c)
            .map(|cc| self.predict_latent(xs_test, cc).map(|(m, _)| m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..xs_test.rows())
            .map(|i| softmax(&means.iter().map(|m| m[i]).collect::<Vec<_>>()))
            .collect())
    }

    /// Laplace log marginal likelihood
    /// `−½f̂ᵀK⁻¹f̂ + yᵀf̂ − Σᵢ log Σ_c exp f̂ᵢᶜ − ½log|I + KW|`.
    ///
    /// With `K = LLᵀ` block-wise, `|I + KW| = |I + LᵀWL|`, which is SPD.
    pub fn log_marginal_likelihood(&self) -> Result<f64, GpcError> {
        let n = self.xs.rows();
        let c = self.num_classes();
        let y = one_hot(&self.labels, c)?;
        let (_, lse_sum) = softmax_stacked(&self.mode.f_hat, n, c);
        let mut l = Matrix::zeros(c * n, c * n);
        for (cc, chol) in self.chols.iter().enumerate() {
            let lc = chol.lower();
            for i in 0..n {
                for j in 0..=i {
                    l[(cc * n + i, cc * n + j)] = lc[(i, j)];
                }
            }
        }
        let lwl = l.transpose().matmul(&self.w_matrix())?.matmul(&l)?;
        let mut m = lwl.add_scaled(&lwl.transpose(), 1.0)?.scaled(0.5);
        for i in 0..c * n {
            m[(i, i)] += 1.0;
        }
        let log_det = CholFactor::new(&m, &JitterPolicy::default())?.log_det();
        Ok(
            -0.5 * dot(&self.mode.a, &self.mode.f_hat) + dot(&y, &self.mode.f_hat)
                - lse_sum
                - 0.5 * log_det,
        )
    }

    /// Per-class Gram matrices actually used, jitter included.
    pub fn grams(&self) -> &[Matrix] {
        &self.ks
    }
}

/// Fits a multi-class classifier; with `optimize` set, all free
/// log-parameters across the class kernels are tuned jointly first.
pub fn fit_multi(
    xs: Matrix,
    labels: Vec<usize>,
    kernels: Vec<KernelExpr>,
    optimize: Option<&OptOptions>,
) -> Result<MultiGpcModel, GpcError> {
    let first = MultiGpcModel::fit(xs, labels, kernels)?;
    let Some(opts) = optimize else {
        return Ok(first);
    };
    let counts: Vec<usize> = first.kernels.iter().map(KernelExpr::num_free).collect();
    let start: Vec<f64> = first.kernels.iter().flat_map(|k| k.pack().values).collect();
    let rebuild = |logs: &[f64]| -> Result<Vec<KernelExpr>, GpcError> {
        let mut out = Vec::with_capacity(counts.len());
        let mut offset = 0;
        for (k, &m) in first.kernels.iter().zip(&counts) {
            out.push(k.with_log_params(&logs[offset..offset + m])?);
            offset += m;
        }
        Ok(out)
    };
    let best = optimize_logs(&start, opts, |logs| {
        let kernels = rebuild(logs).ok()?;
        let model = MultiGpcModel::fit(first.xs.clone(), first.labels.clone(), kernels).ok()?;
        model.log_marginal_likelihood().ok()
    })?;
    let kernels = rebuild(&best)?;
    MultiGpcModel::fit(first.xs, first.labels, kernels)
}

/// Residual of the binary fixed point `f = K∇log p(y|f)`.
pub fn mode_residual(k: &Matrix, y: &[f64], f: &[f64]) -> Result<f64, GpcError> {
    let t = probit_terms(y, f);
    let kg = k.mul_vec(&t.grad)?;
    let diff: Vec<f64> = f.iter().zip(&kg).map(|(p, q)| p - q).collect();
    Ok(norm_inf(&diff))
}

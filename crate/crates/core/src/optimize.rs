//! Derivative-free and gradient-based maximizers.
//!
//! Both optimizers **maximize**; they negate internally. Neither draws random
//! numbers, so identical inputs give bitwise-identical iterate sequences, and
//! neither ever returns a point worse than its start.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

use crate::numerics::{dot, fd_gradient, norm_inf};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
    #[error("starting point is empty")]
    EmptyStart,
    #[error("analytic gradient disagrees with finite differences (max rel. err {0:e})")]
    GradientMismatch(f64),
}

/// Reflection, expansion, contraction and shrink coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmCoefficients {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
}

impl Default for NmCoefficients {
    fn default() -> Self {
        Self {
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOptions {
    /// Budget of objective evaluations.
    pub max_evals: usize,
    /// SCG iteration cap; Nelder-Mead ignores it.
    pub max_iters: usize,
    pub tol_f: f64,
    pub tol_x: f64,
    /// SCG stops once the gradient ∞-norm falls to this value.
    pub tol_grad: f64,
    pub nm_coeffs: NmCoefficients,
    /// Finite-difference step scale for the SCG curvature probe.
    pub scg_sigma0: f64,
    /// Neither optimizer is randomized; carried so callers that randomize
    /// their own starting points can thread one seed through.
    pub seed: u64,
    /// Compare the SCG gradient with central differences at `x0` first.
    pub check_gradient: bool,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            max_iters: usize::MAX,
            tol_f: 1e-10,
            tol_x: 1e-8,
            tol_grad: 1e-6,
            nm_coeffs: NmCoefficients::default(),
            scg_sigma0: 1e-4,
            seed: 0,
            check_gradient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Maximizes `objective` with the Nelder-Mead simplex method.
///
/// The initial simplex steps `0.1·max(1, |x0ᵢ|)` along each axis. A NaN
/// objective value is treated as `−∞`, so the simplex simply retreats from
/// undefined regions. Stops once both the spread of objective values across
/// the simplex is below `tol_f` and its diameter is below `tol_x`, or when
/// `max_evals` is spent.
pub fn nelder_mead<F>(
    mut objective: F,
    x0: &[f64],
    opts: &OptOptions,
) -> Result<NelderMeadResult, OptError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(OptError::EmptyStart);
    }
    // Minimize the negated objective; NaN and +∞ objective map to +∞ cost.
    let mut cost = |x: &[f64]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let c0 = cost(x0);
    if !c0.is_finite() {
        return Err(OptError::NonFiniteStart);
    }

    let NmCoefficients {
        reflect,
        expand,
        contract,
        shrink,
    } = opts.nm_coeffs;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut costs: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    costs.push(c0);
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += 0.1 * x0[i].abs().max(1.0);
        costs.push(cost(&v));
        simplex.push(v);
    }
    let mut evals = n + 1;
    let mut converged = false;

    let affine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    loop {
        // Best first; ties broken by original position for determinism.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        costs = order.iter().map(|&i| costs[i]).collect();

        let spread = costs[n] - costs[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < opts.tol_f && diameter < opts.tol_x {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let worst = simplex[n].clone();
        let xr = affine(&centroid, &worst, -reflect);
        let cr = cost(&xr);
        evals += 1;

        if cr < costs[0] {
            let xe = affine(&centroid, &xr, expand);
            let ce = cost(&xe);
            evals += 1;
            if ce < cr {
                simplex[n] = xe;
                costs[n] = ce;
            } else {
                simplex[n] = xr;
                costs[n] = cr;
            }
            continue;
        }
        if cr < costs[n - 1] {
            simplex[n] = xr;
            costs[n] = cr;
            continue;
        }

        let (xc, cc, accept) = if cr < costs[n] {
            // Outside contraction, toward the reflected point.
            let xc = affine(&centroid, &xr, contract);
            let cc = cost(&xc);
            let ok = cc <= cr;
            (xc, cc, ok)
        } else {
            // Inside contraction, toward the worst vertex.
            let xc = affine(&centroid, &worst, contract);
            let cc = cost(&xc);
            let ok = cc < costs[n];
            (xc, cc, ok)
        };
        evals += 1;
        if accept {
            simplex[n] = xc;
            costs[n] = cc;
            continue;
        }

        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = affine(&best, &simplex[i], shrink);
            costs[i] = cost(&simplex[i]);
        }
        evals += n;
    }

    let (best, &c) = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("simplex is non-empty");
    Ok(NelderMeadResult {
        x: simplex[best].clone(),
        f: -c,
        evals,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScgResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Objective after each iteration, starting with the value at `x0`.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub evals: usize,
    pub converged: bool,
    /// ∞-norm of the gradient at `x`.
    pub grad_norm: f64,
}

/// Maximizes a differentiable objective with Møller's scaled conjugate
/// gradients.
///
/// `objective` returns the value and its gradient. Internally the method
/// minimizes `E = −f` with gradient `g = −∇f`. With search direction `d`,
/// `μ = dᵀg` and `κ = dᵀd`, each iteration:
///
/// 1. If the previous step succeeded, estimates curvature along `d` by a
///    finite difference of gradients: `σ = σ₀/√κ`,
///    `θ = dᵀ(g(x + σd) − g(x)) / σ`. If `μ ≥ 0`, `d` is reset to `−g`.
/// 2. Scales the curvature with the trust parameter `λ`: `δ = θ + λκ`. If
///    `δ ≤ 0` (indefinite), sets `δ = λκ` and `λ ← λ − θ/κ`.
/// 3. Steps `α = −μ/δ` and compares the actual to the predicted reduction,
///    `Δ = 2(E(x + αd) − E(x)) / (αμ)`. The step is taken iff `Δ ≥ 0`, so
///    accepted objective values never decrease.
/// 4. `Δ < 0.25` quadruples `λ` (capped at 1e100); `Δ > 0.75` halves it
///    (floored at 1e-15).
/// 5. After `dim(x)` consecutive successes the direction restarts at
///    steepest descent; otherwise on success the Polak-Ribière-style update
///    `d ← ((g_old − g)ᵀg / μ)·d − g` is used.
///
/// Converges when the gradient ∞-norm is at most `tol_grad`, or when an
/// accepted step moves less than `tol_x` (∞-norm) and changes the objective
/// by less than `tol_f`. A non-finite trial value counts as a failed step.
pub fn scg<F>(mut objective: F, x0: &[f64], opts: &OptOptions) -> Result<ScgResult, OptError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    const LAMBDA_MIN: f64 = 1e-15;
    const LAMBDA_MAX: f64 = 1e100;

    let n = x0.len();
    if n == 0 {
        return Err(OptError::EmptyStart);
    }
    let (f0, grad0) = objective(x0);
    if !f0.is_finite() || grad0.len() != n || grad0.iter().any(|g| !g.is_finite()) {
        return Err(OptError::NonFiniteStart);
    }
    if opts.check_gradient {
        let fd = fd_gradient(|x| objective(x).0, x0, None).map_err(|_| OptError::NonFiniteStart)?;
        let worst = grad0
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
            .fold(0.0, f64::max);
        if worst > 1e-4 {
            return Err(OptError::GradientMismatch(worst));
        }
    }

    let mut x = x0.to_vec();
    let mut e_old = -f0;
    let mut g: Vec<f64> = grad0.iter().map(|v| -v).collect();
    let mut g_old = g.clone();
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut evals = 1;
    let mut trace = vec![f0];

    let mut lambda = 1.0;
    let mut success = true;
    let mut n_success = 0usize;
    let (mut mu, mut kappa, mut theta) = (0.0, 0.0, 0.0);
    let mut converged = norm_inf(&g) <= opts.tol_grad;
    let mut iterations = 0;

    while !converged && evals < opts.max_evals && iterations < opts.max_iters {
        iterations += 1;
        if success {
            mu = dot(&d, &g);
            if mu >= 0.0 {
                d = g.iter().map(|v| -v).collect();
                mu = dot(&d, &g);
            }
            kappa = dot(&d, &d);
            if kappa < f64::EPSILON * f64::EPSILON {
                converged = true;
                break;
            }
            let sigma = opts.scg_sigma0 / kappa.sqrt();
            let probe: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + sigma * di).collect();
            let (_, gp) = objective(&probe);
            evals += 1;
            theta = d
                .iter()
                .zip(gp.iter().zip(&g))
                .map(|(di, (gpi, gi))| di * (-gpi - gi))
                .sum::<f64>()
                / sigma;
            if !theta.is_finite() {
                // The probe left the objective's domain; rely on λ alone.
                theta = 0.0;
            }
        }

        let mut delta = theta + lambda * kappa;
        if delta <= 0.0 {
            delta = lambda * kappa;
            lambda -= theta / kappa;
        }
        let alpha = -mu / delta;
        let x_new: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
        let (f_new, grad_new) = objective(&x_new);
        evals += 1;
        let e_new = -f_new;
        let grad_ok = grad_new.len() == n && grad_new.iter().all(|v| v.is_finite());
        let ratio = if e_new.is_finite() && grad_ok {
            2.0 * (e_new - e_old) / (alpha * mu)
        } else {
            f64::NEG_INFINITY
        };

        if ratio >= 0.0 {
            success = true;
            n_success += 1;
            let step = alpha.abs() * norm_inf(&d);
            let change = (e_new - e_old).abs();
            x = x_new;
            e_old = e_new;
            g_old = core::mem::replace(&mut g, grad_new.iter().map(|v| -v).collect());
            trace.push(-e_old);
            if norm_inf(&g) <= opts.tol_grad || (step < opts.tol_x && change < opts.tol_f) {
                converged = true;
                break;
            }
        } else {
            success = false;
            trace.push(-e_old);
        }

        if ratio < 0.25 {
            lambda = (4.0 * lambda).min(LAMBDA_MAX);
        }
        if ratio > 0.75 {
            lambda = (0.5 * lambda).max(LAMBDA_MIN);
        }

        if n_success == n {
            d = g.iter().map(|v| -v).collect();
            n_success = 0;
        } else if success {
            let beta = (dot(&g_old, &g) - dot(&g, &g)) / mu;
            d = d.iter().zip(&g).map(|(di, gi)| beta * di - gi).collect();
        }
    }

    Ok(ScgResult {
        grad_norm: norm_inf(&g),
        x,
        f: -e_old,
        trace,
        iterations,
        evals,
        converged,
    })
}

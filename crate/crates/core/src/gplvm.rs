//! The Gaussian-process latent variable model.
//!
//! Each of the `d` standardized data columns is modelled as an independent
//! zero-mean GP over latent points `X` (`n×q`) sharing the kernel
//!
//! ```text
//! k(x, x′) = σ²·exp(−|x − x′|² / 2l²) + δ/β
//! ```
//!
//! where `δ` is 1 on the diagonal of the Gram matrix (index identity, not
//! coordinate equality). `X` and `log θ = (log σ, log l, log β)` are fitted
//! jointly by scaled conjugate gradients from a PCA initialization.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numerics::{CholFactor, JitterPolicy, Matrix, NumericsError};
use crate::optimize::{scg, OptError, OptOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvmError {
    #[error("need at least {min} data points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("latent dimension {q} must be at least 1 and below the data dimension {d}")]
    BadLatentDim { q: usize, d: usize },
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("data contains non-finite values")]
    NonFinite,
    #[error("expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("kernel parameters must be positive and finite")]
    BadTheta,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Optimizer(#[from] OptError),
}

/// Kernel parameters `{σ, l, β}`; `β` is the noise precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvmTheta {
    pub sigma: f64,
    pub length: f64,
    pub beta: f64,
}

impl Default for LvmTheta {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            length: 1.0,
            beta: 100.0,
        }
    }
}

impl LvmTheta {
    pub fn to_log(self) -> [f64; 3] {
        [self.sigma.ln(), self.length.ln(), self.beta.ln()]
    }

    pub fn from_log(v: [f64; 3]) -> Self {
        Self {
            sigma: v[0].exp(),
            length: v[1].exp(),
            beta: v[2].exp(),
        }
    }

    fn validate(&self) -> Result<(), LvmError> {
        let ok = [self.sigma, self.length, self.beta]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(LvmError::BadTheta)
        }
    }
}

/// Per-column affine standardization, `(y − mean) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation of each column.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn transform(&self, y: &Matrix) -> Result<Matrix, LvmError> {
        self.check(y)?;
        Ok(Matrix::from_fn(y.rows(), y.cols(), |i, j| {
            (y[(i, j)] - self.mean[j]) / self.scale[j]
        }))
    }

    pub fn inverse_transform(&self, y: &Matrix) -> Result<Matrix, LvmError> {
        self.check(y)?;
        Ok(Matrix::from_fn(y.rows(), y.cols(), |i, j| {
            y[(i, j)] * self.scale[j] + self.mean[j]
        }))
    }

    fn check(&self, y: &Matrix) -> Result<(), LvmError> {
        if y.cols() != self.mean.len() {
            return Err(LvmError::DimensionMismatch {
                expected: self.mean.len(),
                got: y.cols(),
            });
        }
        Ok(())
    }
}

/// Centres each column and scales it to unit population variance.
pub fn preprocess(y_raw: &Matrix) -> Result<(Matrix, Standardizer), LvmError> {
    let (n, d) = (y_raw.rows(), y_raw.cols());
    if n < 2 {
        return Err(LvmError::TooFewPoints { min: 2, got: n });
    }
    if !y_raw.is_finite() {
        return Err(LvmError::NonFinite);
    }
    let mut mean = vec![0.0; d];
    let mut scale = vec![0.0; d];
    for j in 0..d {
        let col = y_raw.col_vec(j);
        let m = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        if var.is_nan() || var <= 0.0 || var.sqrt() <= 1e-12 * m.abs() {
            return Err(LvmError::ZeroVarianceColumn(j));
        }
        mean[j] = m;
        scale[j] = var.sqrt();
    }
    let s = Standardizer { mean, scale };
    Ok((s.transform(y_raw)?, s))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// The SE part of the Gram matrix and the full `K = K_se + I/β`.
fn lvm_grams(x: &Matrix, theta: &LvmTheta) -> (Matrix, Matrix) {
    let n = x.rows();
    let s2 = theta.sigma * theta.sigma;
    let inv_2l2 = 0.5 / (theta.length * theta.length);
    let mut k_se = Matrix::zeros(n, n);
    for i in 0..n {
        k_se[(i, i)] = s2;
        for j in 0..i {
            let v = s2 * (-sq_dist(x.row(i), x.row(j)) * inv_2l2).exp();
            k_se[(i, j)] = v;
            k_se[(j, i)] = v;
        }
    }
    let mut k = k_se.clone();
    for i in 0..n {
        k[(i, i)] += 1.0 / theta.beta;
    }
    (k_se, k)
}

/// The LVM Gram matrix `K`, noise on the diagonal included.
pub fn lvm_gram(x: &Matrix, theta: &LvmTheta) -> Matrix {
    lvm_grams(x, theta).1
}

fn check_dims(x: &Matrix, theta: &LvmTheta, y: &Matrix) -> Result<(), LvmError> {
    theta.validate()?;
    if x.rows() != y.rows() {
        return Err(LvmError::DimensionMismatch {
            expected: y.rows(),
            got: x.rows(),
        });
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(LvmError::NonFinite);
    }
    Ok(())
}

fn likelihood_from(chol: &CholFactor, alpha: &Matrix, y: &Matrix) -> f64 {
    let (n, d) = (y.rows() as f64, y.cols() as f64);
    let quad: f64 = y
        .as_slice()
        .iter()
        .zip(alpha.as_slice())
        .map(|(p, q)| p * q)
        .sum();
    -0.5 * quad - 0.5 * d * chol.log_det() - 0.5 * n * d * (2.0 * PI).ln()
}

/// `Σ_columns −½yᵀK⁻¹y − (d/2)·log|K| − (nd/2)·log 2π`, factoring `K` once.
pub fn lvm_log_likelihood(x: &Matrix, theta: &LvmTheta, y: &Matrix) -> Result<f64, LvmError> {
    check_dims(x, theta, y)?;
    let k = lvm_gram(x, theta);
    let chol = CholFactor::new(&k, &JitterPolicy::default())?;
    let alpha = chol.solve(y)?;
    Ok(likelihood_from(&chol, &alpha, y))
}

/// Analytic gradients of [`lvm_log_likelihood`].
#[derive(Debug, Clone, PartialEq)]
pub struct LvmGradients {
    pub log_likelihood: f64,
    /// `∂L/∂X`, `n×q`.
    pub x: Matrix,
    /// `∂L/∂(log σ, log l, log β)`.
    pub log_theta: [f64; 3],
}

/// Gradients through `G = ∂L/∂K = ½(K⁻¹YYᵀK⁻¹ − d·K⁻¹)`:
///
/// - `∂L/∂log σ = Σ G∘2K_se`
/// - `∂L/∂log l = Σ G∘K_se∘r²/l²`
/// - `∂L/∂log β = −tr(G)/β`
/// - `∂L/∂x_ik = Σ_j 2G_ij·K_se,ij·(x_jk − x_ik)/l²`
pub fn lvm_gradients(x: &Matrix, theta: &LvmTheta, y: &Matrix) -> Result<LvmGradients, LvmError> {
    check_dims(x, theta, y)?;
    let (n, q, d) = (x.rows(), x.cols(), y.cols());
    let (k_se, k) = lvm_grams(x, theta);
    let chol = CholFactor::new(&k, &JitterPolicy::default())?;
    let alpha = chol.solve(y)?;
    let log_likelihood = likelihood_from(&chol, &alpha, y);
    let k_inv = chol.solve(&Matrix::identity(n))?;
    let aat = alpha.matmul(&alpha.transpose())?;
    let g = aat.add_scaled(&k_inv, -(d as f64))?.scaled(0.5);

    let l2 = theta.length * theta.length;
    let mut d_sigma = 0.0;
    let mut d_length = 0.0;
    let mut trace = 0.0;
    let mut dx = Matrix::zeros(n, q);
    for i in 0..n {
        trace += g[(i, i)];
        for j in 0..n {
            let gk = g[(i, j)] * k_se[(i, j)];
            d_sigma += 2.0 * gk;
            if i != j {
                d_length += gk * sq_dist(x.row(i), x.row(j)) / l2;
                for c in 0..q {
                    dx[(i, c)] += 2.0 * gk * (x[(j, c)] - x[(i, c)]) / l2;
                }
            }
        }
    }
    Ok(LvmGradients {
        log_likelihood,
        x: dx,
        log_theta: [d_sigma, d_length, -trace / theta.beta],
    })
}

/// Settings for [`fit_lvm`].
#[derive(Debug, Clone, PartialEq)]
pub struct LvmConfig {
    pub q: usize,
    pub max_iters: usize,
    /// Stop once the gradient ∞-norm over `X` and `log θ` reaches this.
    pub grad_tol: f64,
    /// Seeds the filler for principal directions the data do not span.
    pub seed: u64,
}

impl Default for LvmConfig {
    fn default() -> Self {
        Self {
            q: 2,
            max_iters: 1000,
            grad_tol: 1e-5,
            seed: 0,
        }
    }
}

/// A fitted GP-LVM.
#[derive(Debug, Clone)]
pub struct LvmModel {
    pub x_latent: Matrix,
    pub theta: LvmTheta,
    pub y_std: Matrix,
    pub standardizer: Standardizer,
    /// Latent coordinates from the PCA initialization.
    pub x_init: Matrix,
    /// Log-likelihood at the start and after every SCG iteration.
    pub history: Vec<f64>,
    pub log_likelihood: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Whether `grad_norm ≤ grad_tol` (or SCG's step test) ended the run,
    /// as opposed to the iteration budget.
    pub converged: bool,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns.
fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= 1e-30 * m.max_abs().max(1.0).powi(2) {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = m[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let tau = (m[(r, r)] - m[(p, p)]) / (2.0 * apr);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkr = v[(k, r)];
                    v[(k, p)] = c * vkp - s * vkr;
                    v[(k, r)] = s * vkp + c * vkr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.col_vec(src);
        // Deterministic sign: largest-magnitude entry positive.
        let big = col
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if big < 0.0 {
            col.iter_mut().for_each(|c| *c = -*c);
        }
        vectors.set_col(dst, &col);
    }
    (values, vectors)
}

/// Projects standardized data onto its top-`q` principal directions.
/// Directions with (numerically) zero variance are replaced by small
/// seeded uniform coordinates so that `X` does not start degenerate.
pub fn pca_init(y_std: &Matrix, q: usize, seed: u64) -> Result<Matrix, LvmError> {
    let (n, d) = (y_std.rows(), y_std.cols());
    if q == 0 || q > d {
        return Err(LvmError::BadLatentDim { q, d });
    }
    let cov = y_std.transpose().matmul(y_std)?.scaled(1.0 / n as f64);
    let (values, vectors) = symmetric_eigen(&cov);
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let mut x = Matrix::zeros(n, q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in 0..q {
        if values[c] <= 1e-10 * total {
            for i in 0..n {
                x[(i, c)] = rng.random_range(-1e-2..1e-2);
            }
            continue;
        }
        for i in 0..n {
            x[(i, c)] = (0..d).map(|j| y_std[(i, j)] * vectors[(j, c)]).sum();
        }
    }
    Ok(x)
}

fn pack(x: &Matrix, theta: &LvmTheta) -> Vec<f64> {
    let mut v = x.as_slice().to_vec();
    v.extend(theta.to_log());
    v
}

fn unpack(v: &[f64], n: usize, q: usize) -> (Matrix, LvmTheta) {
    let x = Matrix::from_row_slice(n, q, &v[..n * q]).expect("length checked by caller");
    let t = [v[n * q], v[n * q + 1], v[n * q + 2]];
    (x, LvmTheta::from_log(t))
}

/// Standardizes `y_raw`, initializes `X` by PCA and `θ = {1, 1, 100}`, then
/// maximizes the likelihood over `[X row-major, log σ, log l, log β]` with
/// SCG.
pub fn fit_lvm(y_raw: &Matrix, config: &LvmConfig) -> Result<LvmModel, LvmError> {
    let (n, d) = (y_raw.rows(), y_raw.cols());
    if n < 3 {
        return Err(LvmError::TooFewPoints { min: 3, got: n });
    }
    if config.q == 0 || config.q >= d {
        return Err(LvmError::BadLatentDim { q: config.q, d });
    }
    let q = config.q;
    let (y_std, standardizer) = preprocess(y_raw)?;
    let x_init = pca_init(&y_std, q, config.seed)?;
    let theta0 = LvmTheta::default();

    let objective = |v: &[f64]| -> (f64, Vec<f64>) {
        let (x, theta) = unpack(v, n, q);
        match lvm_gradients(&x, &theta, &y_std) {
            Ok(g) => {
                let mut grad = g.x.into_vec();
                grad.extend(g.log_theta);
                (g.log_likelihood, grad)
            }
            Err(_) => (f64::NAN, vec![f64::NAN; v.len()]),
        }
    };
    let opts = OptOptions {
        max_evals: usize::MAX,
        max_iters: config.max_iters,
        tol_grad: config.grad_tol,
        tol_f: 0.0,
        tol_x: 0.0,
        ..OptOptions::default()
    };
    let result = scg(objective, &pack(&x_init, &theta0), &opts)?;
    let (x_latent, theta) = unpack(&result.x, n, q);
    Ok(LvmModel {
        x_latent,
        theta,
        y_std,
        standardizer,
        x_init,
        history: result.trace,
        log_likelihood: result.f,
        grad_norm: result.grad_norm,
        iterations: result.iterations,
        converged: result.converged,
    })
}

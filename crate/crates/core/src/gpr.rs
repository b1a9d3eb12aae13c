//! Exact Gaussian-process regression.
//!
//! The prior mean is zero and noise is folded into the kernel, so a fitted
//! [`GprModel`] predicts noisy targets `y*`: the diagonal of `K**` carries
//! `σn²`, while the cross-covariance `K*` never does.
//!
//! ```
//! use gp_core::{gpr::GprModel, kernels::parse_kernel_spec, Matrix};
//!
//! let xs = Matrix::column(&[-1.5, -1.0, -0.75, -0.4, -0.25, 0.0]);
//! let y = vec![-1.6, -1.1, -0.4, 0.1, 0.5, 0.8];
//! let k = parse_kernel_spec("se(sf=1.27,l=1)+noise(sn=0.3!)").unwrap();
//! let model = GprModel::fit(xs, y, k).unwrap();
//! let p = model.predict(&Matrix::column(&[0.2])).unwrap();
//! assert!((p.variance[0] - 0.21).abs() < 0.02);
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

use crate::kernels::{KernelError, KernelExpr};
use crate::numerics::{dot, CholFactor, JitterPolicy, Matrix, NumericsError};
use crate::optimize::{nelder_mead, OptError, OptOptions};

/// Free log-hyperparameters are confined to `[−LOG_BOUND, LOG_BOUND]`
/// (values within `1e-6 .. 1e6`) during optimization.
pub const LOG_BOUND: f64 = 13.815510557964274;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GprError {
    #[error("no training data")]
    EmptyData,
    #[error("training data contains non-finite values")]
    NonFinite,
    #[error("{inputs} inputs but {targets} targets")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("test inputs have dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
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

/// A fitted regressor. Immutable; `K` is factored exactly once in
/// [`GprModel::fit`].
#[derive(Debug, Clone)]
pub struct GprModel {
    xs: Matrix,
    y: Vec<f64>,
    kernel: KernelExpr,
    chol: CholFactor,
    /// `K⁻¹y`
    alpha: Vec<f64>,
}

/// Pointwise predictive distribution of `y*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Prediction {
    /// Lower and upper edges of `mean ± multiplier·√variance`.
    pub fn band(&self, multiplier: f64) -> (Vec<f64>, Vec<f64>) {
        self.mean
            .iter()
            .zip(&self.variance)
            .map(|(m, v)| {
                let half = multiplier * v.sqrt();
                (m - half, m + half)
            })
            .unzip()
    }
}

impl GprModel {
    pub fn fit(xs: Matrix, y: Vec<f64>, kernel: KernelExpr) -> Result<Self, GprError> {
        if xs.rows() == 0 || y.is_empty() {
            return Err(GprError::EmptyData);
        }
        if xs.rows() != y.len() {
            return Err(GprError::LengthMismatch {
                inputs: xs.rows(),
                targets: y.len(),
            });
        }
        if !xs.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(GprError::NonFinite);
        }
        let k = kernel.gram(&xs)?;
        let chol = CholFactor::new(&k, &JitterPolicy::default())?;
        let alpha = chol.solve_vec(&y)?;
        Ok(Self {
            xs,
            y,
            kernel,
            chol,
            alpha,
        })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.xs
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn kernel(&self) -> &KernelExpr {
        &self.kernel
    }

    pub fn chol(&self) -> &CholFactor {
        &self.chol
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    fn check_test(&self, xs_test: &Matrix) -> Result<(), GprError> {
        if xs_test.cols() != self.xs.cols() {
            return Err(GprError::DimensionMismatch {
                expected: self.xs.cols(),
                got: xs_test.cols(),
            });
        }
        Ok(())
    }

    /// Mean `K*·K⁻¹y` and pointwise variance `K** − K*·K⁻¹·K*ᵀ`.
    ///
    /// The variance is `k** − ‖L⁻¹k*‖²` per test point, clamped at zero to
    /// absorb rounding.
    pub fn predict(&self, xs_test: &Matrix) -> Result<Prediction, GprError> {
        self.check_test(xs_test)?;
        let ks = self.kernel.cross(&self.xs, xs_test)?;
        let kss = self.kernel.self_variance(xs_test)?;
        let mut mean = Vec::with_capacity(ks.rows());
        let mut variance = Vec::with_capacity(ks.rows());
        for (i, prior) in kss.into_iter().enumerate() {
            let row = ks.row(i);
            mean.push(dot(row, &self.alpha));
            let v = self.chol.solve_lower_vec(row)?;
            variance.push((prior - dot(&v, &v)).max(0.0));
        }
        Ok(Prediction { mean, variance })
    }

    /// Joint prediction: mean and the full `m×m` posterior covariance.
    pub fn predict_joint(&self, xs_test: &Matrix) -> Result<(Vec<f64>, Matrix), GprError> {
        self.check_test(xs_test)?;
        let ks = self.kernel.cross(&self.xs, xs_test)?;
        let kss = self.kernel.test_covariance(xs_test)?;
        let mean = ks.mul_vec(&self.alpha)?;
        let v = self.chol.solve_lower(&ks.transpose())?;
        let cov = kss.add_scaled(&v.transpose().matmul(&v)?, -1.0)?;
        Ok((mean, cov))
    }

    /// `−½yᵀK⁻¹y − ½log|K| − (n/2)·log 2π`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.y.len() as f64;
        -0.5 * dot(&self.y, &self.alpha) - 0.5 * self.chol.log_det() - 0.5 * n * (2.0 * PI).ln()
    }
}

/// Maximizes the log marginal likelihood over the free hyperparameters of
/// `template` with Nelder-Mead in log-space.
///
/// Returns the best kernel found and its log marginal likelihood. Points
/// where fitting fails, or which leave `[−LOG_BOUND, LOG_BOUND]`, score
/// `−∞`.
pub fn optimize_hyperparams(
    xs: &Matrix,
    y: &[f64],
    template: &KernelExpr,
    opts: &OptOptions,
) -> Result<(KernelExpr, f64), GprError> {
    let start = template.pack();
    if start.values.is_empty() {
        return Err(GprError::NoFreeParams);
    }
    // Surface data errors before the optimizer swallows them.
    GprModel::fit(xs.clone(), y.to_vec(), template.clone())?;

    let objective = |logs: &[f64]| -> f64 {
        if logs.iter().any(|v| v.abs() > LOG_BOUND) {
            return f64::NAN;
        }
        template
            .with_log_params(logs)
            .ok()
            .and_then(|k| GprModel::fit(xs.clone(), y.to_vec(), k).ok())
            .map_or(f64::NAN, |m| m.log_marginal_likelihood())
    };
    let start_values: Vec<f64> = start
        .values
        .iter()
        .map(|v| v.clamp(-LOG_BOUND, LOG_BOUND))
        .collect();
    let result = match nelder_mead(objective, &start_values, opts) {
        Ok(r) => r,
        Err(OptError::NonFiniteStart) => return Err(GprError::OptimizerDiverged),
        Err(e) => return Err(e.into()),
    };
    let kernel = template.with_log_params(&result.x)?;
    let lml = GprModel::fit(xs.clone(), y.to_vec(), kernel.clone())?.log_marginal_likelihood();
    Ok((kernel, lml))
}

/// Conditions a partitioned zero-mean Gaussian on its first block.
///
/// For `[a; b] ~ N(0, [[A, Cᵀ], [C, B]])` returns the mean `C·A⁻¹·a` and
/// covariance `B − C·A⁻¹·Cᵀ` (the Schur complement of `A`) of `b | a`.
pub fn condition_gaussian(
    a_obs: &[f64],
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
) -> Result<(Vec<f64>, Matrix), GprError> {
    let n = a.rows();
    let m = b.rows();
    if a_obs.len() != n || c.rows() != m || c.cols() != n || !b.is_square() {
        return Err(GprError::DimensionMismatch {
            expected: n,
            got: a_obs.len(),
        });
    }
    let chol = CholFactor::new(a, &JitterPolicy::default())?;
    let mean = c.mul_vec(&chol.solve_vec(a_obs)?)?;
    // A⁻¹Cᵀ, n×m
    let a_inv_ct = chol.solve(&c.transpose())?;
    let cov = b.add_scaled(&c.matmul(&a_inv_ct)?, -1.0)?;
    Ok((mean, cov))
}

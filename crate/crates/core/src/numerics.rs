//! Dense linear algebra and numerical utilities.
//!
//! Everything here is deliberately small: a row-major [`Matrix`], a
//! [`CholFactor`] that escalates diagonal jitter when a factorization fails
//! and records how much it added, and a central-difference gradient used as
//! the oracle for every analytic gradient in the crate.
//!
//! No routine in this crate forms an explicit inverse for a prediction or a
//! likelihood; all `K⁻¹·b` products go through [`CholFactor::solve_vec`] or
//! [`CholFactor::solve`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

/// Errors raised by the dense linear algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite even after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumericsError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// An `n×1` matrix, i.e. `n` one-dimensional input points.
    pub fn column(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if self.cols != v.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Elementwise `self + scale·rhs`.
    pub fn add_scaled(&self, rhs: &Matrix, scale: f64) -> Result<Matrix, NumericsError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(NumericsError::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Largest absolute entrywise difference; `∞` when shapes differ.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry magnitude.
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Diagonal jitter schedule for [`CholFactor::new`].
///
/// A failed factorization is retried with `initial·mean(diag)` added to the
/// diagonal, multiplying the relative jitter by `factor` on each of
/// `max_retries` attempts (default: 1e-10 up to 1e-6).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    pub initial: f64,
    pub factor: f64,
    pub max_retries: usize,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        Self {
            initial: 1e-10,
            factor: 10.0,
            max_retries: 5,
        }
    }
}

impl JitterPolicy {
    /// No retries: fail on the first non-positive pivot.
    pub fn none() -> Self {
        Self {
            initial: 0.0,
            factor: 1.0,
            max_retries: 0,
        }
    }
}

/// Lower Cholesky factor `L` with `L·Lᵀ = A + jitter_applied·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholFactor {
    lower: Matrix,
    jitter_applied: f64,
}

/// Factorizes a symmetric matrix, escalating jitter per `policy`.
pub fn cholesky(a: &Matrix, policy: &JitterPolicy) -> Result<CholFactor, NumericsError> {
    CholFactor::new(a, policy)
}

impl CholFactor {
    pub fn new(a: &Matrix, policy: &JitterPolicy) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        if !a.is_finite() {
            return Err(NumericsError::NonFinite);
        }
        let asym = a.relative_asymmetry();
        if asym > 1e-12 {
            return Err(NumericsError::NotSymmetric(asym));
        }
        if let Some(lower) = factorize(a, 0.0) {
            return Ok(Self {
                lower,
                jitter_applied: 0.0,
            });
        }
        let n = a.rows();
        let mean_diag = a.diagonal().iter().sum::<f64>() / n as f64;
        let mut last = 0.0;
        if mean_diag > 0.0 {
            let mut eps = policy.initial;
            for _ in 0..policy.max_retries {
                let jitter = eps * mean_diag;
                last = jitter;
                if let Some(lower) = factorize(a, jitter) {
                    return Ok(Self {
                        lower,
                        jitter_applied: jitter,
                    });
                }
                eps *= policy.factor;
            }
        }
        Err(NumericsError::NotPositiveDefinite { jitter: last })
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// `2·Σ log L_ii`, the log-determinant of the factored matrix.
    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves `L·x = b`.
    pub fn solve_lower_vec(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        self.check_len(b.len())?;
        let l = &self.lower;
        let mut x = b.to_vec();
        for i in 0..x.len() {
            let s = x[i] - dot(&l.row(i)[..i], &x[..i]);
            x[i] = s / l[(i, i)];
        }
        Ok(x)
    }

    /// Solves `Lᵀ·x = b`.
    pub fn solve_upper_vec(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        self.check_len(b.len())?;
        let l = &self.lower;
        let n = b.len();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        Ok(x)
    }

    /// Solves `(L·Lᵀ)·x = b` by forward then back substitution.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let z = self.solve_lower_vec(b)?;
        self.solve_upper_vec(&z)
    }

    /// Column-wise [`Self::solve_lower_vec`].
    pub fn solve_lower(&self, b: &Matrix) -> Result<Matrix, NumericsError> {
        self.map_columns(b, |c| self.solve_lower_vec(c))
    }

    /// Column-wise [`Self::solve_vec`].
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, NumericsError> {
        self.map_columns(b, |c| self.solve_vec(c))
    }

    /// `L·Lᵀ`, the matrix that was actually factored.
    pub fn reconstruct(&self) -> Matrix {
        let l = &self.lower;
        let n = l.rows();
        Matrix::from_fn(n, n, |i, j| {
            let k = i.min(j) + 1;
            dot(&l.row(i)[..k], &l.row(j)[..k])
        })
    }

    fn map_columns(
        &self,
        b: &Matrix,
        mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, NumericsError>,
    ) -> Result<Matrix, NumericsError> {
        self.check_len(b.rows())?;
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = f(&b.col_vec(j))?;
            out.set_col(j, &x);
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<(), NumericsError> {
        if len != self.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Cholesky-Banachiewicz on `a + jitter·I`; `None` on a non-positive pivot.
fn factorize(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                let pivot = a[(i, i)] + jitter - s;
                if !pivot.is_finite() || pivot <= 0.0 {
                    return None;
                }
                l[(i, i)] = pivot.sqrt();
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Central-difference gradient of `f` at `x`.
///
/// Coordinate `i` uses step `h·max(1, |xᵢ|)`; `h` defaults to `1e-5`.
pub fn fd_gradient<F>(mut f: F, x: &[f64], h: Option<f64>) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    let base = h.unwrap_or(1e-5);
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let step = base * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        let g = (up - down) / (2.0 * step);
        if !g.is_finite() {
            return Err(NumericsError::NonFinite);
        }
        grad.push(g);
    }
    Ok(grad)
}

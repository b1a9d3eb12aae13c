//! Covariance functions and their composition.
//!
//! A [`KernelExpr`] is a sum of [`KernelTerm`]s. Three terms exist:
//!
//! | term                    | `k(x, x′)`                                  |
//! |-------------------------|---------------------------------------------|
//! | `se(sf=σf,l=l)`         | `σf²·exp(−‖x−x′‖² / 2l²)`                   |
//! | `periodic(nu=ν)`        | `exp(−2·sin²(νπ(x−x′)))`, 1-D inputs only   |
//! | `noise(sn=σn)`          | `σn²·δ(x, x′)`                              |
//!
//! The Kronecker delta of the noise term is an identity-of-index flag passed
//! by the caller (`same_point`), never a numeric comparison of inputs: a test
//! point that happens to coincide with a training point still receives no
//! cross-noise.
//!
//! The same expressions are written and read in a small textual grammar,
//!
//! ```text
//! expr := term ("+" term)*
//! term := "se(sf=R,l=R)" | "periodic(nu=R)" | "noise(sn=R)"
//! ```
//!
//! where a parameter value followed by `!` is held fixed during
//! hyperparameter optimization:
//!
//! ```
//! use gp_core::kernels::parse_kernel_spec;
//!
//! let k = parse_kernel_spec("se(sf=1.27, l=1) + noise(sn=0.3!)").unwrap();
//! assert_eq!(k.to_string(), "se(sf=1.27,l=1)+noise(sn=0.3!)");
//! assert_eq!(k.pack().values.len(), 2);
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("periodic term requires 1-D inputs, got dimension {0}")]
    PeriodicOnMultiDim(usize),
    #[error("parse error at position {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("kernel has more than one noise term")]
    DuplicateNoise,
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("kernel expression has no terms")]
    Empty,
    #[error("hyperparameter vector does not match kernel structure")]
    StructureMismatch,
}

/// A hyperparameter value and whether optimizers may move it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub value: f64,
    pub fixed: bool,
}

impl Param {
    pub fn free(value: f64) -> Self {
        Self {
            value,
            fixed: false,
        }
    }

    pub fn fixed(value: f64) -> Self {
        Self { value, fixed: true }
    }

    /// Whether the parameter is held out of the log-space vector. A zero
    /// value has no logarithm, so it is always held out.
    fn is_locked(&self) -> bool {
        self.fixed || self.value == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelTerm {
    SquaredExp { sigma_f: Param, length: Param },
    Periodic { nu: Param },
    Noise { sigma_n: Param },
}

impl KernelTerm {
    pub fn se(sigma_f: f64, length: f64) -> Self {
        Self::SquaredExp {
            sigma_f: Param::free(sigma_f),
            length: Param::free(length),
        }
    }

    pub fn periodic(nu: f64) -> Self {
        Self::Periodic {
            nu: Param::free(nu),
        }
    }

    pub fn noise(sigma_n: f64) -> Self {
        Self::Noise {
            sigma_n: Param::free(sigma_n),
        }
    }

    fn params(&self) -> impl Iterator<Item = (&'static str, &Param)> {
        let (a, b) = match self {
            Self::SquaredExp { sigma_f, length } => (("sf", sigma_f), Some(("l", length))),
            Self::Periodic { nu } => (("nu", nu), None),
            Self::Noise { sigma_n } => (("sn", sigma_n), None),
        };
        core::iter::once(a).chain(b)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        let (a, b) = match self {
            Self::SquaredExp { sigma_f, length } => (sigma_f, Some(length)),
            Self::Periodic { nu } => (nu, None),
            Self::Noise { sigma_n } => (sigma_n, None),
        };
        core::iter::once(a).chain(b)
    }

    fn validate(&self) -> Result<(), KernelError> {
        for (name, p) in self.params() {
            let ok = match self {
                Self::Noise { .. } => p.value >= 0.0,
                _ => p.value > 0.0,
            };
            if !ok || !p.value.is_finite() {
                return Err(KernelError::NonPositiveParam {
                    name,
                    value: p.value,
                });
            }
        }
        Ok(())
    }

    /// Term value for `x`, `x′` with the squared distance precomputed.
    #[inline]
    fn value(&self, sq_dist: f64, diff_1d: f64, same_point: bool) -> f64 {
        match *self {
            Self::SquaredExp { sigma_f, length } => {
                let (s, l) = (sigma_f.value, length.value);
                s * s * (-sq_dist / (2.0 * l * l)).exp()
            }
            Self::Periodic { nu } => {
                let s = (nu.value * PI * diff_1d).sin();
                (-2.0 * s * s).exp()
            }
            Self::Noise { sigma_n } => {
                if same_point {
                    sigma_n.value * sigma_n.value
                } else {
                    0.0
                }
            }
        }
    }
}

/// A validated sum of kernel terms.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpr {
    terms: Vec<KernelTerm>,
}

/// Free hyperparameters in log-space plus the fixed/free layout they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperVector {
    pub values: Vec<f64>,
    /// One entry per parameter of the structure, `true` where held out.
    pub mask: Vec<bool>,
}

impl KernelExpr {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self, KernelError> {
        if terms.is_empty() {
            return Err(KernelError::Empty);
        }
        let noises = terms
            .iter()
            .filter(|t| matches!(t, KernelTerm::Noise { .. }))
            .count();
        if noises > 1 {
            return Err(KernelError::DuplicateNoise);
        }
        for t in &terms {
            t.validate()?;
        }
        Ok(Self { terms })
    }

    /// Squared exponential plus white noise, the workhorse regression kernel.
    pub fn se_noise(sigma_f: f64, length: f64, sigma_n: f64) -> Result<Self, KernelError> {
        Self::new(alloc::vec![
            KernelTerm::se(sigma_f, length),
            KernelTerm::noise(sigma_n)
        ])
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn has_noise(&self) -> bool {
        self.terms
            .iter()
            .any(|t| matches!(t, KernelTerm::Noise { .. }))
    }

    pub fn has_periodic(&self) -> bool {
        self.terms
            .iter()
            .any(|t| matches!(t, KernelTerm::Periodic { .. }))
    }

    /// `σn²`, or zero without a noise term.
    pub fn noise_variance(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                KernelTerm::Noise { sigma_n } => sigma_n.value * sigma_n.value,
                _ => 0.0,
            })
            .sum()
    }

    /// The same expression with any noise term dropped.
    pub fn without_noise(&self) -> Result<Self, KernelError> {
        Self::new(
            self.terms
                .iter()
                .filter(|t| !matches!(t, KernelTerm::Noise { .. }))
                .copied()
                .collect(),
        )
    }

    /// Checks that inputs of dimension `dim` are acceptable.
    pub fn check_dim(&self, dim: usize) -> Result<(), KernelError> {
        if dim == 0 {
            return Err(KernelError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if dim != 1 && self.has_periodic() {
            return Err(KernelError::PeriodicOnMultiDim(dim));
        }
        Ok(())
    }

    /// `k(x, x′)`; `same_point` switches the noise term on.
    pub fn eval(&self, x: &[f64], x_prime: &[f64], same_point: bool) -> Result<f64, KernelError> {
        if x.len() != x_prime.len() {
            return Err(KernelError::DimensionMismatch {
                expected: x.len(),
                got: x_prime.len(),
            });
        }
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x, x_prime, same_point))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], x_prime: &[f64], same_point: bool) -> f64 {
        let sq: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b) * (a - b)).sum();
        let diff = x[0] - x_prime[0];
        self.terms
            .iter()
            .map(|t| t.value(sq, diff, same_point))
            .sum()
    }

    /// `n×n` Gram matrix over the rows of `xs`, noise on the diagonal.
    pub fn gram(&self, xs: &Matrix) -> Result<Matrix, KernelError> {
        self.check_dim(xs.cols())?;
        let n = xs.rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval_unchecked(xs.row(i), xs.row(j), i == j);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// `m×n` cross-covariance `K*` between test rows and training rows.
    pub fn cross(&self, xs_train: &Matrix, xs_test: &Matrix) -> Result<Matrix, KernelError> {
        if xs_train.cols() != xs_test.cols() {
            return Err(KernelError::DimensionMismatch {
                expected: xs_train.cols(),
                got: xs_test.cols(),
            });
        }
        self.check_dim(xs_train.cols())?;
        Ok(Matrix::from_fn(xs_test.rows(), xs_train.rows(), |i, j| {
            self.eval_unchecked(xs_test.row(i), xs_train.row(j), false)
        }))
    }

    /// Diagonal of `K**`: `k(x*, x*)` including noise.
    pub fn self_variance(&self, xs_test: &Matrix) -> Result<Vec<f64>, KernelError> {
        self.check_dim(xs_test.cols())?;
        Ok((0..xs_test.rows())
            .map(|i| self.eval_unchecked(xs_test.row(i), xs_test.row(i), true))
            .collect())
    }

    /// Full `K**` over the test rows, noise on the diagonal.
    pub fn test_covariance(&self, xs_test: &Matrix) -> Result<Matrix, KernelError> {
        self.gram(xs_test)
    }

    pub fn num_params(&self) -> usize {
        self.terms.iter().map(|t| t.params().count()).sum()
    }

    /// Log-space vector of the free parameters.
    pub fn pack(&self) -> HyperVector {
        let mut values = Vec::new();
        let mut mask = Vec::new();
        for t in &self.terms {
            for (_, p) in t.params() {
                mask.push(p.is_locked());
                if !p.is_locked() {
                    values.push(p.value.ln());
                }
            }
        }
        HyperVector { values, mask }
    }

    /// Rebuilds an expression of this structure from a log-space vector.
    pub fn unpack(&self, h: &HyperVector) -> Result<KernelExpr, KernelError> {
        if h.mask != self.pack().mask {
            return Err(KernelError::StructureMismatch);
        }
        self.with_log_params(&h.values)
    }

    /// Like [`Self::unpack`] but takes the free log-values directly.
    pub fn with_log_params(&self, log_values: &[f64]) -> Result<KernelExpr, KernelError> {
        if log_values.len() != self.num_free() {
            return Err(KernelError::StructureMismatch);
        }
        let mut out = self.clone();
        let mut it = log_values.iter();
        for t in &mut out.terms {
            for p in t.params_mut() {
                if !p.is_locked() {
                    // Length checked above.
                    p.value = it.next().map_or(p.value, |v| v.exp());
                }
            }
        }
        for t in &out.terms {
            t.validate()?;
        }
        Ok(out)
    }

    pub fn num_free(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.params())
            .filter(|(_, p)| !p.is_locked())
            .count()
    }
}

impl fmt::Display for KernelExpr {
    /// Writes the grammar form. A precision (`{:.4}`) applies to every value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            let name = match t {
                KernelTerm::SquaredExp { .. } => "se",
                KernelTerm::Periodic { .. } => "periodic",
                KernelTerm::Noise { .. } => "noise",
            };
            write!(f, "{name}(")?;
            for (k, (pname, p)) in t.params().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                match f.precision() {
                    Some(prec) => write!(f, "{pname}={:.*}", prec, p.value)?,
                    None => write!(f, "{pname}={}", p.value)?,
                }
                if p.fixed {
                    f.write_str("!")?;
                }
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl core::str::FromStr for KernelExpr {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_kernel_spec(s)
    }
}

/// Parses the kernel grammar. Errors carry a byte offset into `text`.
pub fn parse_kernel_spec(text: &str) -> Result<KernelExpr, KernelError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut terms = Vec::new();
    loop {
        terms.push(p.term()?);
        p.skip_ws();
        if p.eat(b'+') {
            continue;
        }
        if p.pos < p.src.len() {
            return Err(p.error("expected `+` or end of input"));
        }
        break;
    }
    KernelExpr::new(terms)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> KernelError {
        KernelError::Parse {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), KernelError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&alloc::format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, KernelError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        // ASCII letters only.
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64, KernelError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return Err(self.error("expected a decimal number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = core::str::from_utf8(&bytes[start..i]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(v)
            }
            _ => Err(self.error("malformed number")),
        }
    }

    /// `name=value[!]` pairs inside parentheses, in the order of `names`.
    fn args(&mut self, names: &[&'static str]) -> Result<Vec<Param>, KernelError> {
        self.expect(b'(')?;
        let mut out: Vec<Option<Param>> = alloc::vec![None; names.len()];
        for k in 0..names.len() {
            if k > 0 {
                self.expect(b',')?;
            }
            let at = self.pos;
            let name = self.ident()?;
            let Some(slot) = names.iter().position(|n| *n == name.as_str()) else {
                self.pos = at;
                self.skip_ws();
                return Err(self.error(&alloc::format!(
                    "unknown parameter `{name}`, expected one of {}",
                    names.join(", ")
                )));
            };
            if out[slot].is_some() {
                self.pos = at;
                self.skip_ws();
                return Err(self.error(&alloc::format!("parameter `{name}` given twice")));
            }
            self.expect(b'=')?;
            let value = self.number()?;
            let fixed = self.eat(b'!');
            out[slot] = Some(Param { value, fixed });
        }
        self.expect(b')')?;
        // All slots were filled exactly once above.
        Ok(out.into_iter().flatten().collect())
    }

    fn term(&mut self) -> Result<KernelTerm, KernelError> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident()?;
        match name.as_str() {
            "se" => {
                let p = self.args(&["sf", "l"])?;
                Ok(KernelTerm::SquaredExp {
                    sigma_f: p[0],
                    length: p[1],
                })
            }
            "periodic" => {
                let p = self.args(&["nu"])?;
                Ok(KernelTerm::Periodic { nu: p[0] })
            }
            "noise" => {
                let p = self.args(&["sn"])?;
                Ok(KernelTerm::Noise { sigma_n: p[0] })
            }
            other => {
                self.pos = at;
                Err(self.error(&alloc::format!(
                    "unknown term `{other}`, expected se, periodic or noise"
                )))
            }
        }
    }
}

//! Gaussian processes from first principles.
//!
//! This crate holds the numerical heart of the toolkit and builds without
//! `std` (it needs `alloc`). The pieces are layered bottom-up:
//!
//! - [`numerics`]: dense matrices, Cholesky with recorded jitter, triangular
//!   solves, log-determinants and a central-difference gradient.
//! - [`kernels`]: composable covariance functions (squared exponential,
//!   periodic, white noise), Gram/cross matrices, log-space hyperparameter
//!   packing and a small textual grammar.
//! - [`optimize`]: Nelder-Mead and scaled conjugate gradients, both
//!   maximizing.
//! - [`gpr`]: exact regression, marginal likelihood and Gaussian
//!   conditioning.
//! - [`gpc`]: Laplace-approximation classification with a probit link
//!   (binary) or softmax link (multi-class).
//! - [`gplvm`]: the GP latent variable model.
//!
//! With the default `std` feature the float intrinsics come from `std`;
//! without it they are routed through `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod gpc;
pub mod gplvm;
pub mod gpr;
pub mod kernels;
pub mod numerics;
pub mod optimize;

pub use gpc::{BinaryGpcModel, GpcError, MultiGpcModel};
pub use gplvm::{LvmConfig, LvmError, LvmModel, LvmTheta};
pub use gpr::{GprError, GprModel, Prediction};

pub use kernels::{KernelError, KernelExpr, KernelTerm, Param};
pub use numerics::{CholFactor, JitterPolicy, Matrix, NumericsError};
pub use optimize::{OptError, OptOptions};

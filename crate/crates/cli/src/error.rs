use std::fmt::Write as _;

use gp_core::gpc::GpcError;
use gp_core::gplvm::LvmError;
use gp_core::{GprError, KernelError, NumericsError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed files, invalid data. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// The numerics failed on otherwise valid input. Exit code 3.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

/// Renders a kernel-spec parse error with a caret under the offending byte.
pub fn kernel_spec_error(spec: &str, err: &KernelError) -> CliError {
    match err {
        KernelError::Parse { pos, message } => {
            let mut out = format!("invalid kernel spec: {message}\n  {spec}\n  ");
            let col = spec.get(..*pos).map_or(*pos, |s| s.chars().count());
            let _ = write!(out, "{}^", " ".repeat(col));
            CliError::Input(out)
        }
        other => CliError::Input(format!("invalid kernel spec: {other}")),
    }
}

fn numeric_or_input(is_numeric: bool, msg: String) -> CliError {
    if is_numeric {
        CliError::Numeric(msg)
    } else {
        CliError::Input(msg)
    }
}

fn is_numeric_failure(e: &NumericsError) -> bool {
    matches!(
        e,
        NumericsError::NotPositiveDefinite { .. } | NumericsError::NonFinite
    )
}

impl From<GprError> for CliError {
    fn from(e: GprError) -> Self {
        let numeric = match &e {
            GprError::Numerics(n) => is_numeric_failure(n),
            GprError::OptimizerDiverged | GprError::Optimizer(_) => true,
            _ => false,
        };
        numeric_or_input(numeric, e.to_string())
    }
}

impl From<GpcError> for CliError {
    fn from(e: GpcError) -> Self {
        let numeric = match &e {
            GpcError::Numerics(n) => is_numeric_failure(n),
            GpcError::NoConvergence { .. }
            | GpcError::OptimizerDiverged
            | GpcError::Optimizer(_) => true,
            _ => false,
        };
        numeric_or_input(numeric, e.to_string())
    }
}

impl From<LvmError> for CliError {
    fn from(e: LvmError) -> Self {
        let numeric = match &e {
            LvmError::Numerics(n) => is_numeric_failure(n),
            LvmError::Optimizer(_) => true,
            _ => false,
        };
        numeric_or_input(numeric, e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

use num_complex::Complex64 as c64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("dense matrix of dimension {dim} needs {bytes} bytes, over the {budget}-byte budget")]
    OverBudget { dim: usize, bytes: u128, budget: u128 },

    #[error("eigensolver failed on a {dim}x{dim} matrix: {reason}")]
    NoConvergence { dim: usize, reason: String },

    #[error("H - E_B is singular to working precision at E_B = {e_b}")]
    Singular { e_b: c64 },

    #[error("winding number indeterminate: {0}")]
    IndeterminateWinding(String),

    #[error("no crossing found: {0}")]
    NoCrossing(String),

    #[error("scaling collapse: {0}")]
    Collapse(String),

    #[error("fit did not converge (final residual {residual:.3e})")]
    FitFailed { residual: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SvmmaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SvmmaError {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("labels not binary: found {0} distinct values")]
    LabelsNotBinary(usize),

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program basis became singular")]
    SingularBasis,

    #[error("linear program stopped at the iteration limit ({0} pivots)")]
    IterationLimit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SvmmaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SvmmaError::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(what: &'static str, expected: usize, got: usize) -> Self {
        SvmmaError::DimensionMismatch {
            what,
            expected,
            got,
        }
    }
}

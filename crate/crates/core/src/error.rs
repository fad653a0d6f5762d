use thiserror::Error;

/// Errors raised by the transform library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("pencil is not definite at divide-and-conquer node {node}: schur complement {value:e}")]
    IndefinitePencil { node: usize, value: f64 },

    #[error("interlacing violated: {0}")]
    InterlacingViolation(String),

    #[error("secular equation failed to converge for root {root}")]
    SecularNoConvergence { root: usize },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("section buffer insufficient: residual {residual:e} exceeds {tolerance:e} (N = {section}, p = {buffer})")]
    BufferInsufficient { section: usize, buffer: usize, residual: f64, tolerance: f64 },

    #[error("layer decomposition {source_order} -> {target_order} (N = {section}, p = {buffer}) failed: {cause}")]
    NodeFailure { target_order: usize, source_order: usize, section: usize, buffer: usize, cause: Box<Error> },

    #[error("plan and coefficients disagree: {0}")]
    DataMismatch(String),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

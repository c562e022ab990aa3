use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("need at least {required} observations, got {actual}")]
    TooFewObservations { required: usize, actual: usize },

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("column {col} has zero sample variance (stabilize the data first)")]
    ZeroVariance { col: usize },

    #[error("degrees of freedom m = {m} too small, need m >= {min}")]
    InsufficientDof { m: usize, min: usize },

    #[error("rank deficient {what}: {detail}")]
    RankDeficient { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure in {test}: {detail}")]
    Numerical { test: String, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

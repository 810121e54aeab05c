use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("not a permutation of 1..={n}: {reason}")]
    InvalidPermutation { n: usize, reason: String },

    #[error("invalid index tuple: {0}")]
    InvalidTuple(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("iterative proportional fitting did not converge after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("exact enumeration limited to n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

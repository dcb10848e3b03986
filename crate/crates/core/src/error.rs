use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{modes} modes exceed the dense capacity of {cap}")]
    Capacity { modes: usize, cap: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("full-rank condition violated: {side} block has rank {rank} < {required}")]
    Degenerate {
        side: &'static str,
        rank: usize,
        required: usize,
    },

    #[error("search space of {size} candidates exceeds the exhaustive cap of {cap}; use annealing")]
    CapExceeded { size: u128, cap: u128 },

    #[error("malformed assignment: {0}")]
    Assignment(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

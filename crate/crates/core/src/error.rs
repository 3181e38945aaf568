use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed corpus or vector file content, with the 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An input violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Tensor shapes do not conform for the requested operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Inconsistent model or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A NaN or infinity surfaced where a finite value is required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An id fell outside its table.
    #[error("index error: {0}")]
    Index(String),

    /// Unreadable, truncated, or version-mismatched checkpoint.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

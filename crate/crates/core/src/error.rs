use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum AtlasError {
    /// Input data violates a type invariant (non-Hermitian matrix, bad trace, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Arguments outside the domain of an operation (length or dimension mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or hit an ill-conditioned system.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operation was called on an input that does not satisfy its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AtlasError>;

impl From<serde_json::Error> for AtlasError {
    fn from(err: serde_json::Error) -> Self {
        AtlasError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Text input failed to parse. Line and column are 1-based.
    #[error("line {line}, col {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A domain-level constraint was violated (unknown predicate, arity
    /// mismatch, undeclared object, ...).
    #[error("{0}")]
    Validation(String),

    /// Vector or layer dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A checkpoint could not be decoded.
    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (Gset or JSON graph files). Carries the 1-based
    /// line number of the offending line where one exists.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An argument violated an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Binary or on-disk format violation (bad header, truncated data,
    /// graph/embedding hash mismatch).
    #[error("bad format: {0}")]
    BadFormat(String),

    /// Training produced a non-finite quantity (degenerate policy).
    #[error("policy collapse: {0}")]
    PolicyCollapse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

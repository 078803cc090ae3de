use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The caller supplied data outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An internal consistency check failed (a bug or corrupted data).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    /// A parse failure in one of the text formats.
    #[error("parse error: {0}")]
    Parse(String),
    /// I/O failure while reading or writing checkpoints and data files.
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn inconsistent(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Failures of a CLI job, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    /// Raised by the test hook that stops a derivation after some checkpoints.
    #[error("halted after {0} checkpoints")]
    Halted(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Inconsistent(_) => 3,
            CliError::Halted(_) => 130,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl From<tautrec::Error> for CliError {
    fn from(e: tautrec::Error) -> Self {
        match e {
            tautrec::Error::Inconsistency(m) => CliError::Inconsistent(m),
            tautrec::Error::InvalidInput(m) => CliError::Invalid(m),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invalid(format!("json error: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::fmt::Display;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("oracle check failed: {0}")]
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Oracle(_) => 3,
        }
    }

    pub(crate) fn io(context: impl Display, err: impl Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<adds_core::Error> for CliError {
    fn from(e: adds_core::Error) -> Self {
        match e {
            adds_core::Error::Io(m) => CliError::Io(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

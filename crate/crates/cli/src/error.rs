use thiserror::Error;

/// Process exit codes. Nothing else is ever returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    VerificationFailed = 1,
    Io = 2,
    Config = 3,
    Data = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Io(_) => ExitCode::Io,
            CliError::Data(_) => ExitCode::Data,
        }
    }

    pub(crate) fn field(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("invalid `{field}`: {msg}"))
    }
}

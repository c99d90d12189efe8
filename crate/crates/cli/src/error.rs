use thiserror::Error;

/// Failures of a CLI run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    #[error("{0}")]
    Spec(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    /// The computation itself failed; exit code 1.
    #[error(transparent)]
    Core(#[from] ldp_core::Error),
}

impl CliError {
    pub fn spec(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Spec(format!("{field}: {msg}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) | CliError::Io { .. } => 2,
            CliError::Core(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

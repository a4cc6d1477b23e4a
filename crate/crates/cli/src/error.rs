use ranksubset_core::Error as CoreError;

/// Failures surfaced to the user, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or unreadable files.
    #[error("{0}")]
    Usage(String),
    /// Input data that cannot be used as given.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    /// Classifies a library error raised while fitting user data.
    pub fn from_data(err: CoreError) -> Self {
        match err {
            CoreError::InvalidConfig(_) => CliError::Usage(err.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }

    /// Classifies a library error raised from configuration alone.
    pub fn from_config(err: CoreError) -> Self {
        CliError::Usage(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

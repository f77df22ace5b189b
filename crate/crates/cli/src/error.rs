use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, inputs or files: exit code 1.
    #[error("{0}")]
    Usage(String),
    /// The computation itself went wrong: exit code 2.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<grover_optics::Error> for CliError {
    fn from(e: grover_optics::Error) -> Self {
        use grover_optics::Error as E;
        match e {
            E::Internal(_) | E::ModelInconsistency(_) => CliError::Internal(e.to_string()),
            E::InvalidArgument(_) | E::InvalidState(_) | E::Parse { .. } | E::Json(_) => CliError::Usage(e.to_string()),
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

pub type CliResult<T> = Result<T, CliError>;

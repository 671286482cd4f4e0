use polyosc_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad user input: tree text, parameter lists, state tuples, points.
    #[error("{0}")]
    Input(String),
    /// A numerical routine failed on otherwise valid input.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The verification suite ran and found a violation.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Io(_) | CliError::Format(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse(_)
            | CoreError::InvalidTree(_)
            | CoreError::InvalidParams(_)
            | CoreError::ShellMismatch { .. }
            | CoreError::Domain(_) => CliError::Input(e.to_string()),
            CoreError::Pole { .. } | CoreError::NoConvergence { .. } | CoreError::CgArgs(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

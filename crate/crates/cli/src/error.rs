use thiserror::Error;

/// CLI-level errors, split by exit code: validation problems exit 2,
/// numerical degeneracies exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl From<armshrink::Error> for CliError {
    fn from(err: armshrink::Error) -> Self {
        match err {
            armshrink::Error::VarianceUndefined { .. }
            | armshrink::Error::DegenerateInput(_)
            | armshrink::Error::GridTooCoarse { .. } => CliError::Degenerate(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

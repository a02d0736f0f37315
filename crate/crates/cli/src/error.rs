use std::fmt;

/// CLI failure with its process exit code: 2 for configuration errors,
/// 3 for model preconditions, 4 for internal assertions.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Model(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<stablefield::Error> for CliError {
    fn from(err: stablefield::Error) -> Self {
        use stablefield::Error::*;
        match err {
            InvalidParameter(_) | DimensionMismatch(_) | EmptySelection => {
                CliError::Config(err.to_string())
            }
            ModelPrecondition(_) | UnsupportedFamily(_) | DomainExceeded(_) | FitUnstable
            | IndeterminateLedger => CliError::Model(err.to_string()),
            Internal(_) => CliError::Internal(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Internal(format!("i/o failure: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

use std::fmt;

/// Harness-level errors, mapped onto the process exit codes:
/// 0 success, 2 assertion failure, 3 integrator failure, 4 bad input
/// (1 is reserved for I/O and other unexpected conditions).
#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    Assertion(String),
    Integrator(isoflow_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Assertion(_) => 2,
            CliError::Integrator(_) => 3,
            CliError::BadInput(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::BadInput(msg) => write!(f, "bad input: {msg}"),
            CliError::Assertion(msg) => write!(f, "assertion failed: {msg}"),
            CliError::Integrator(e) => write!(f, "integration failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::fmt;

use iotpatch_core::Error as CoreError;

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters: exit 1.
    Usage(String),
    /// Trace or simulation failure: exit 2.
    Data(String),
    /// `oracle-check` found a mismatch: exit 3.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Check(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParams(_)
            | CoreError::FractionOutOfRange(_)
            | CoreError::UnsupportedMetric(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

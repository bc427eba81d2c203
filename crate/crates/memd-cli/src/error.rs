//! CLI error type with the documented exit-code mapping.

use thiserror::Error;

/// Exit codes: 0 success, 2 input error, 3 degenerate decomposition,
/// 4 write error. A degenerate decomposition still writes its report, so
/// commands signal it through the returned code rather than this error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("write error: {0}")]
    Write(String),
}

/// Exit code for a decomposition that produced no IMFs.
pub const EXIT_DEGENERATE: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Write(_) => 4,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn write(msg: impl Into<String>) -> Self {
        Self::Write(msg.into())
    }
}

impl From<memd::Error> for CliError {
    fn from(e: memd::Error) -> Self {
        Self::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

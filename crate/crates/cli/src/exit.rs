//! Process exit codes and error classification.

use std::fmt;

pub const OK: i32 = 0;
pub const INTERNAL: i32 = 1;
pub const USAGE: i32 = 2;
pub const VERIFICATION: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files.
    Usage(anyhow::Error),
    /// Numerical failure or unexpected I/O on output.
    Internal(anyhow::Error),
    /// A verification run completed and found violations.
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => USAGE,
            CliError::Internal(_) => INTERNAL,
            CliError::Verification(_) => VERIFICATION,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(anyhow::anyhow!(msg.into()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "error: {e:#}"),
            CliError::Internal(e) => write!(f, "internal error: {e:#}"),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

/// Library errors from user-supplied parameters or inputs are usage errors;
/// numerical failures are internal.
pub fn classify(e: scatterlab::Error) -> CliError {
    use scatterlab::Error as E;
    match e {
        E::NonFinite(_) | E::Numerical(_) => CliError::Internal(e.into()),
        _ => CliError::Usage(e.into()),
    }
}

/// Errors while writing results.
pub fn output(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

pub type CliResult<T> = Result<T, CliError>;

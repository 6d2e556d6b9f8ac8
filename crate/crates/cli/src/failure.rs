use std::fmt;

use psum::Error;

/// Why a run stopped, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or inconsistent input.
    Schema(String),
    Budget(String),
    /// A computed identity or reconstruction did not check out.
    Verification(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) | Failure::Io(_) => 1,
            Failure::Budget(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn from_core(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            Error::NotStabilized { .. }
            | Error::NoRecurrenceFound { .. }
            | Error::ValidationFailed { .. }
            | Error::NoMatch
            | Error::GoodReductionFailed(_) => Failure::Verification(e.to_string()),
            _ => Failure::Schema(e.to_string()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "invalid input: {m}"),
            Failure::Budget(m) => write!(f, "{m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

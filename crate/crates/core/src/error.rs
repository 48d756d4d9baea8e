use thiserror::Error;

/// Errors raised by constructors, evaluators and solvers.
///
/// Check failures are never errors: they are reported through
/// [`CheckReport`](crate::report::CheckReport).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("operator `{op}` is not available for {flavor}")]
    OperatorUnavailable { op: String, flavor: String },
    #[error("index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn budget(what: &'static str, needed: impl TryInto<u128>, limit: impl TryInto<u128>) -> Self {
        Error::Budget {
            what,
            needed: needed.try_into().unwrap_or(u128::MAX),
            limit: limit.try_into().unwrap_or(u128::MAX),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

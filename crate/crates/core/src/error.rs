use thiserror::Error;

/// Errors produced by the outage-analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of a bound or approximation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("no convergence in {routine} after {iterations} iterations")]
    Convergence {
        routine: &'static str,
        iterations: usize,
    },

    /// A search ran to its ceiling without meeting the target.
    #[error("target not attained: {0}")]
    Unattained(String),

    /// Reading or writing a report failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by constructors and solvers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid {what} at index {index}: {reason}")]
    InvalidEntry {
        what: &'static str,
        index: usize,
        reason: String,
    },
    #[error("{what} does not sum to one (sum = {sum})")]
    NotNormalized { what: &'static str, sum: f64 },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed instance file: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size out of range: {0}")]
    Size(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("infeasible code parameters: {0}")]
    Infeasible(String),

    #[error("matrix is singular over F2")]
    Singular,

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("permutation not in the pool: {0}")]
    NotInPool(String),

    #[error("sampling budget exhausted after {attempts} attempts: {reason}")]
    SamplingBudget { attempts: u64, reason: String },

    #[error("message length {got} does not match K = {expected}")]
    MessageLength { got: usize, expected: usize },

    #[error("code dimension too large for exhaustive search: K = {0}")]
    TooLarge(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

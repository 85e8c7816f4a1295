use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid data vector: {0}")]
    InvalidData(String),
    #[error("invalid sampling parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("outcome does not expose seeds")]
    SeedsUnavailable,
    #[error("non-binary value {0} where a binary domain is required")]
    NonBinary(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("order does not determine the estimator: {0}")]
    AmbiguousOrder(String),
    #[error("quadrature did not reach tolerance {tol:e} within {intervals} intervals (error estimate {err:e})")]
    QuadratureBudget { tol: f64, intervals: usize, err: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

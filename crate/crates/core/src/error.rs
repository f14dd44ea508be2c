use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("quadrature did not reach tolerance (achieved relative error {achieved:e})")]
    Quadrature { achieved: f64 },
    #[error("series did not converge: {0}")]
    NoConvergence(String),
    #[error("matrix dimension {size} exceeds budget {cap}")]
    Budget { size: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("polynomial is not divisible by (1-|z|^2)")]
    NotDivisible,
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

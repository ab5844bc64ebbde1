use thiserror::Error;

/// Errors raised by body construction, estimators and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite integrand value at direction {direction:?}")]
    NonFinite { direction: Vec<f64> },
    #[error("missing oracle: {0}")]
    MissingOracle(&'static str),
    #[error("not computable: {0}")]
    NotComputable(String),
    #[error("no closed-form certificate for {0}")]
    NoCertificate(String),
    #[error("degenerate measure: {0}")]
    Degenerate(String),
    #[error("spec parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

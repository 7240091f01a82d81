use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("lambda = {lambda} exceeds the generated cluster range (coverage < {coverage})")]
    OutOfRange { lambda: f64, coverage: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("evaluation branches disagree at |xi| = {xi}: {a} vs {b}")]
    BranchMismatch { xi: f64, a: f64, b: f64 },

    #[error("tail certificate failed: bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailCertificate { bound: f64, tolerance: f64 },

    #[error("exponent fit needs at least 3 usable windows, found {usable} ({dropped} zero windows dropped)")]
    InsufficientWindows { usable: usize, dropped: usize },

    #[error("integer overflow in exact accumulation")]
    Overflow,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, WeylError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(WeylError::InvalidSpec(msg.into()))
}

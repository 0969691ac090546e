use thiserror::Error;

/// Errors raised by the restoration library.
#[derive(Debug, Error)]
pub enum SlrmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("wrong field order: expected {expected}, found {found}")]
    WrongOrder { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("filter bank violates the unitary extension principle (residual {0:e})")]
    UepViolation(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("iteration cap of {cap} reached without convergence ({what})")]
    NotConverged { what: String, cap: usize },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SlrmError>;

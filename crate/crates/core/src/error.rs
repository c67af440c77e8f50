use thiserror::Error;

/// Errors produced while building, solving or post-processing a WG system.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("system is singular: {0}")]
    Solvability(String),

    #[error("solve residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Accuracy { residual: f64, tolerance: f64 },

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by operators, estimators, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("operation requires explicit matrix entries, but the operator is implicit")]
    ImplicitOperator,

    #[error(
        "degenerate denominator in normalized estimator at coordinate {coord} \
         (|sum of squared probe entries| = {value:e} < {threshold:e})"
    )]
    DegenerateDenominator {
        coord: usize,
        value: f64,
        threshold: f64,
    },

    #[error("enumeration over {n} dimensions exceeds the cap of {cap} (2^n sign vectors)")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

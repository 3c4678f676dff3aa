use thiserror::Error;

/// Errors raised by the numerical kernel and the modules built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("matrix dimension {0} outside supported range 1..=64")]
    InvalidDimension(usize),

    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (relative skew part {skew:.3e})")]
    NotHermitian { skew: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.6e})")]
    NotPsd { min_eig: f64 },

    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("invalid conjugation: {0}")]
    InvalidConjugation(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("inconsistent property report: {0}")]
    InconsistentReport(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid random spec: {0}")]
    InvalidSpec(String),

    #[error("invalid target expression: {0}")]
    InvalidTarget(String),
}

pub type Result<T> = std::result::Result<T, OpError>;

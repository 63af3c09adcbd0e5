use thiserror::Error;

/// Errors raised by the toolkit. Protocol aborts are not errors; they are
/// recorded in the transcript.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("input too large for exact evaluation: {0}")]
    TooLarge(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero-probability outcome {0}")]
    ZeroProbability(String),

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("malformed input: {0}")]
    Parse(String),
}


pub type Result<T> = std::result::Result<T, Error>;

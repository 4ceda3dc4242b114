use thiserror::Error;

/// Errors produced while building, loading, or processing tensors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("line {line}: index {index} out of range for mode {mode} (dimension {dim})")]
    IndexOutOfRange {
        line: usize,
        mode: usize,
        index: usize,
        dim: usize,
    },

    #[error("invalid entry: {0}")]
    InvalidEntry(String),

    #[error("tensor is not square: dims {0:?}")]
    NotSquare(Vec<usize>),

    #[error("operation needs at least {needed} modes, tensor has {actual}")]
    TooFewModes { needed: usize, actual: usize },

    #[error("expected vector of length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid mode class map: {0}")]
    ClassMap(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SkmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SkmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SkmError::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SkmError>;

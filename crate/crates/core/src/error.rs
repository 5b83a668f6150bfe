use std::io;

use thiserror::Error;

/// Errors produced while building, decoding, multiplying or (de)serializing matrices.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("malformed grammar: {0}")]
    MalformedGrammar(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("NaN value at row {row}, column {col}")]
    NaN { row: usize, col: usize },

    #[error("corrupt container: {0}")]
    CorruptContainer(String),

    #[error("symbol code {code} does not fit in 32 bits")]
    CodeOverflow { code: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are inconsistent (inner dimensions, bias length, ...).
    #[error("shape mismatch: {context}")]
    Shape { context: String },

    /// Matrix dimensions must both be at least 1.
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },

    /// Backing storage does not match rows x cols.
    #[error("data length {actual} does not match {rows}x{cols} = {expected}")]
    LengthMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },

    /// A float element is NaN or infinite.
    #[error("non-finite element at flat index {index}")]
    NonFinite { index: usize },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// Operand A does not fit the persistent on-chip buffer.
    #[error("A is {n}x{k} but the persistent buffer holds at most {max_n}x{max_k}")]
    Capacity {
        n: usize,
        k: usize,
        max_n: usize,
        max_k: usize,
    },

    /// The call sequence violates the accelerator protocol.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// Matrix file does not start with the expected magic bytes.
    #[error("bad magic bytes {found:?}, expected {expected:?}")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },

    /// Matrix file declares a dtype code this reader does not know.
    #[error("unknown dtype code {code}")]
    UnknownDtype { code: u8 },

    /// Matrix file ends before the declared payload is complete.
    #[error("truncated file: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    /// A file holds a different dtype than the caller requires.
    #[error("dtype mismatch: expected {expected}, found {found}")]
    Dtype {
        expected: &'static str,
        found: &'static str,
    },

    /// A sweep was invoked with an empty axis.
    #[error("empty sweep axis: {0}")]
    EmptySweep(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two sparse entries address the same cell.
    #[error("duplicate cell ({i_r}, {i_a}, {i_e})")]
    DuplicateCell { i_r: usize, i_a: usize, i_e: usize },

    /// A cell index lies outside the grid it is used with.
    #[error("cell ({i_r}, {i_a}, {i_e}) outside grid {n_r}x{n_a}x{n_e}")]
    IndexOutOfGrid {
        i_r: usize,
        i_a: usize,
        i_e: usize,
        n_r: usize,
        n_a: usize,
        n_e: usize,
    },

    /// A numeric argument violates its domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// An input value is NaN or infinite where finite data is required.
    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),

    /// Two containers that must share a grid do not.
    #[error("grid mismatch between {0} and {1}")]
    GridMismatch(&'static str, &'static str),

    /// A container has the wrong element count for its declared dims.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// File does not start with the expected magic bytes.
    #[error("bad magic: expected {expected:?}, got {got:?}")]
    BadMagic { expected: [u8; 4], got: [u8; 4] },

    /// File ends before the declared payload does.
    #[error("truncated file: need {expected} bytes, got {got}")]
    TruncatedFile { expected: u64, got: u64 },

    /// Header dims are unusable or disagree with the payload length.
    #[error("dim mismatch: {0}")]
    DimMismatch(String),

    /// Mask payload byte is neither 0 nor 1.
    #[error("invalid mask byte {byte:#04x} at payload offset {offset}")]
    InvalidMask { byte: u8, offset: u64 },

    /// A count that must divide another does not.
    #[error("{what}: {value} not divisible by {divisor}")]
    DivisibilityError {
        what: &'static str,
        value: usize,
        divisor: usize,
    },

    /// Backward pass or finite difference produced NaN or infinity.
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),

    /// Text input failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainError(msg.into())
    }
}

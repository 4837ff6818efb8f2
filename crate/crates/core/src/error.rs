use crate::bitstream::FormatError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("plane of size {height}x{width} has an odd dimension")]
    OddDimension { height: usize, width: usize },
    #[error("plane of size {height}x{width} is smaller than {min}x{min}")]
    TooSmall { height: usize, width: usize, min: usize },
    #[error("plane of size {height}x{width} is not a power of two in both dimensions")]
    NotPowerOfTwo { height: usize, width: usize },
    #[error("sample out of range at index {index}: {value}")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("the leaf queue is empty")]
    EmptyQueue,
    #[error(transparent)]
    Format(#[from] FormatError),
}

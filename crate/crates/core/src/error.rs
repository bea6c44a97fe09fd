use thiserror::Error;

use crate::matfile::MatrixFileError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operand shapes are incompatible. Shapes are `(rows, cols)`; vectors are `(len, 1)`.
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid size {value} for {what}: {reason}")]
    InvalidSize {
        what: &'static str,
        value: usize,
        reason: &'static str,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is invertible; the hash requires a singular matrix")]
    InvertibleMatrix,

    #[error("model 2 requires a block size divisible by 4, got {m}")]
    QuarterMismatch { m: usize },

    #[error("stream of {len} bits is not a padded block stream for m = {m}")]
    UnpaddedStream { len: usize, m: usize },

    #[error("collision construction failed: {0}")]
    CollisionNotFound(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    MatrixFile(#[from] MatrixFileError),
}

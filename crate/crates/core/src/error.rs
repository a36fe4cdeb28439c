use thiserror::Error;

use crate::numeric::NumericError;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("invalid spectrum: {0}")]
    InvalidSpec(String),
    #[error("{fractional} non-integer eigenvalues exceed the exact-search limit of {limit}")]
    SearchLimit { fractional: usize, limit: usize },
    #[error("brute force supports at most {max} eigenvalues, got {len}")]
    BruteForceTooLarge { len: usize, max: usize },
    #[error("ordering is not a permutation of the spectrum")]
    OrderingMismatch,
    #[error("matrix holds floating-point entries; exact checks need an exact matrix")]
    Inexact,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("not a frame: the vectors do not span the space")]
    NotAFrame,
    #[error("construction broke an internal invariant: {0}")]
    Internal(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

//! Spectral Tetris construction of sparse unit-norm frames.
//!
//! A cursor walks the rows of the synthesis matrix. In row `j` with
//! remaining weight `λ`:
//!
//! * `λ ≥ 1`: place a single `1` and move one column right (`λ -= 1`);
//! * `λ < 1`: place the `2 × 2` block
//!   `[√(λ/2) √(λ/2); √(1-λ/2) -√(1-λ/2)]` on rows `j, j+1`, move two
//!   columns right and charge `2 - λ` to row `j + 1`.
//!
//! The row is finished once its remaining weight hits zero.

mod matrix;

use nalgebra::DMatrix;
use serde::Serialize;

pub use matrix::{Entries, SynthesisMatrix, STANDARD_BASIS};

use crate::blocks::{
    maximal_block_number_with_limit, BlockStructure, EigenvalueSpec, DEFAULT_SEARCH_LIMIT,
};
use crate::error::FrameError;
use crate::numeric::{Rational, Sign, SignedRoot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepCase {
    /// `λ > 1`: single one, cursor moves right.
    One,
    /// `0 < λ < 1`: `2 × 2` block spanning rows `j, j + 1`.
    Block,
    /// `λ = 1`: single one that completes the row.
    FinalOne,
}

/// One cursor move. `row` and `col` are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CursorStep {
    pub row: usize,
    pub col: usize,
    pub case: StepCase,
    pub lambda_before: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CursorTrace {
    pub steps: Vec<CursorStep>,
}

/// Output of [`construct_optimal`].
#[derive(Debug, Clone)]
pub struct Construction {
    pub matrix: SynthesisMatrix,
    pub blocks: BlockStructure,
    pub trace: CursorTrace,
}

/// Runs Spectral Tetris on `ordering`, which must be a permutation of the
/// spectrum. The ordering is used as given.
pub fn spectral_tetris(
    spec: &EigenvalueSpec,
    ordering: &[Rational],
) -> Result<(SynthesisMatrix, CursorTrace), FrameError> {
    if !spec.same_multiset(ordering) {
        return Err(FrameError::OrderingMismatch);
    }
    let n = spec.dim();
    let count = spec.count();
    let one = Rational::one();
    let two = Rational::from(2);

    let mut remaining = ordering.to_vec();
    let mut entries = Vec::with_capacity(count + 2 * n);
    let mut trace = CursorTrace::default();
    let mut col = 0usize;

    for row in 0..n {
        loop {
            let lambda = remaining[row].clone();
            if lambda < one {
                if row + 1 >= n {
                    return Err(FrameError::Internal(format!(
                        "2x2 block requested in last row with remaining weight {lambda}"
                    )));
                }
                if col + 2 > count {
                    return Err(FrameError::Internal("cursor ran past column N".into()));
                }
                let half = &lambda / &two;
                let top = SignedRoot::of(Sign::Plus, &half)?;
                let bottom = SignedRoot::of(Sign::Plus, &(&one - &half))?;
                entries.push(((row, col), top.clone()));
                entries.push(((row + 1, col), bottom.clone()));
                entries.push(((row, col + 1), top));
                entries.push(((row + 1, col + 1), -bottom));
                trace.steps.push(CursorStep {
                    row,
                    col,
                    case: StepCase::Block,
                    lambda_before: lambda.clone(),
                });
                col += 2;
                remaining[row + 1] = &remaining[row + 1] - (&two - &lambda);
                remaining[row] = Rational::zero();
            } else {
                if col >= count {
                    return Err(FrameError::Internal("cursor ran past column N".into()));
                }
                entries.push(((row, col), SignedRoot::one()));
                let case = if lambda == one {
                    StepCase::FinalOne
                } else {
                    StepCase::One
                };
                trace.steps.push(CursorStep {
                    row,
                    col,
                    case,
                    lambda_before: lambda,
                });
                col += 1;
                remaining[row] -= &one;
            }
            if remaining[row].is_zero() {
                break;
            }
        }
    }
    if col != count {
        return Err(FrameError::Internal(format!(
            "cursor consumed {col} columns, expected {count}"
        )));
    }

    Ok((SynthesisMatrix::from_exact(n, count, entries)?, trace))
}

pub fn construct_optimal(spec: &EigenvalueSpec) -> Result<Construction, FrameError> {
    construct_optimal_with_limit(spec, DEFAULT_SEARCH_LIMIT)
}

/// Orders the spectrum blockwise and runs Spectral Tetris on it; the result
/// has `N + 2(n - μ)` nonzero entries.
pub fn construct_optimal_with_limit(
    spec: &EigenvalueSpec,
    limit: usize,
) -> Result<Construction, FrameError> {
    let blocks = maximal_block_number_with_limit(spec, limit)?;
    let (matrix, trace) = spectral_tetris(spec, &blocks.ordering)?;
    Ok(Construction {
        matrix,
        blocks,
        trace,
    })
}

/// A dense frame expressed in a named orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFrame {
    pub basis_label: String,
    pub matrix: DMatrix<f64>,
}

/// Orthonormality tolerance for [`apply_basis_change`].
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// Maps every frame vector through `basis`, which must be orthonormal.
/// The result is as sparse in the columns of `basis` as `m` is in the
/// standard basis.
pub fn apply_basis_change(
    m: &SynthesisMatrix,
    basis: &DMatrix<f64>,
    label: impl Into<String>,
) -> Result<DenseFrame, FrameError> {
    let n = m.dim();
    if basis.nrows() != n || basis.ncols() != n {
        return Err(FrameError::DimensionMismatch(format!(
            "basis is {}x{}, frame lives in dimension {n}",
            basis.nrows(),
            basis.ncols()
        )));
    }
    let gram = basis.transpose() * basis;
    let deviation = (gram - DMatrix::<f64>::identity(n, n)).amax();
    if deviation.is_nan() || deviation > ORTHONORMAL_TOLERANCE {
        return Err(FrameError::NotOrthonormal(deviation));
    }
    Ok(DenseFrame {
        basis_label: label.into(),
        matrix: basis * m.to_dense(),
    })
}

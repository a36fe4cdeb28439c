//! Optimally sparse unit-norm frames with a prescribed frame-operator
//! spectrum.
//!
//! The construction is Spectral Tetris: a cursor walks the rows of an
//! `n × N` synthesis matrix, placing ones and `2 × 2` blocks
//! `[√(λ/2) √(λ/2); √(1-λ/2) -√(1-λ/2)]` until each row has the requested
//! square sum. When the eigenvalues are ordered so that as many prefix sums
//! as possible are integers (the maximal block number `μ`), the result has
//! exactly `N + 2(n - μ)` nonzero entries, which is the least possible for
//! any unit-norm frame with that spectrum.
//!
//! All bookkeeping is exact: entries are signed square roots of rationals
//! and every frame property is checked without floating tolerance.

pub mod analysis;
pub mod blocks;
pub mod cli;
mod error;
pub mod io;
pub mod numeric;
pub mod tetris;

pub use analysis::{verify, FrameBounds, VerificationReport};
pub use blocks::{maximal_block_number, BlockStructure, EigenvalueSpec};
pub use error::FrameError;
pub use numeric::{RadicalSum, Rational, Sign, SignedRoot};
pub use tetris::{construct_optimal, spectral_tetris, Construction, CursorTrace, SynthesisMatrix};

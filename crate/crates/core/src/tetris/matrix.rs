use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::FrameError;
use crate::numeric::SignedRoot;

/// Label of the standard unit vector basis.
pub const STANDARD_BASIS: &str = "standard";

/// Stored nonzero entries, keyed by `(row, col)` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Exact(BTreeMap<(usize, usize), SignedRoot>),
    /// Restored from a floating-point file; exact checks refuse these.
    Inexact(BTreeMap<(usize, usize), f64>),
}

/// Sparse `n × N` synthesis matrix whose columns are the frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisMatrix {
    n_rows: usize,
    n_cols: usize,
    basis_label: String,
    entries: Entries,
}

impl SynthesisMatrix {
    /// Zero entries are dropped.
    pub fn from_exact(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = ((usize, usize), SignedRoot)>,
    ) -> Result<Self, FrameError> {
        let mut map = BTreeMap::new();
        for ((row, col), value) in entries {
            check_bounds(row, col, n_rows, n_cols)?;
            if !value.is_zero() {
                map.insert((row, col), value);
            }
        }
        Ok(SynthesisMatrix {
            n_rows,
            n_cols,
            basis_label: STANDARD_BASIS.to_string(),
            entries: Entries::Exact(map),
        })
    }

    /// Zero entries are dropped.
    pub fn from_inexact(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self, FrameError> {
        let mut map = BTreeMap::new();
        for ((row, col), value) in entries {
            check_bounds(row, col, n_rows, n_cols)?;
            if value != 0.0 {
                map.insert((row, col), value);
            }
        }
        Ok(SynthesisMatrix {
            n_rows,
            n_cols,
            basis_label: STANDARD_BASIS.to_string(),
            entries: Entries::Inexact(map),
        })
    }

    /// Builds an exact matrix from dense rows (used for hand-written fixtures).
    pub fn from_rows(rows: Vec<Vec<SignedRoot>>) -> Result<Self, FrameError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(FrameError::DimensionMismatch("ragged rows".into()));
        }
        let entries = rows.into_iter().enumerate().flat_map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(move |(j, value)| ((i, j), value))
        });
        SynthesisMatrix::from_exact(n_rows, n_cols, entries)
    }

    pub fn with_basis_label(mut self, label: impl Into<String>) -> Self {
        self.basis_label = label.into();
        self
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.n_rows
    }

    /// Number of frame vectors `N`.
    pub fn frame_count(&self) -> usize {
        self.n_cols
    }

    pub fn basis_label(&self) -> &str {
        &self.basis_label
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    pub fn exact_entries(&self) -> Result<&BTreeMap<(usize, usize), SignedRoot>, FrameError> {
        match &self.entries {
            Entries::Exact(map) => Ok(map),
            Entries::Inexact(_) => Err(FrameError::Inexact),
        }
    }

    /// Exact entry at `(row, col)`; zero when not stored.
    pub fn exact(&self, row: usize, col: usize) -> Result<SignedRoot, FrameError> {
        Ok(self
            .exact_entries()?
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(SignedRoot::zero))
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.entries {
            Entries::Exact(map) => map.len(),
            Entries::Inexact(map) => map.len(),
        }
    }

    /// Positions of the stored entries in `(row, col)` order.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        match &self.entries {
            Entries::Exact(map) => map.keys().copied().collect(),
            Entries::Inexact(map) => map.keys().copied().collect(),
        }
    }

    /// Row indices of the support of each column.
    pub fn column_supports(&self) -> Vec<Vec<usize>> {
        let mut supports = vec![Vec::new(); self.n_cols];
        for (row, col) in self.positions() {
            supports[col].push(row);
        }
        supports
    }

    /// Entries as `f64`, keyed by `(row, col)`.
    pub fn float_entries(&self) -> BTreeMap<(usize, usize), f64> {
        match &self.entries {
            Entries::Exact(map) => map.iter().map(|(k, v)| (*k, v.to_f64())).collect(),
            Entries::Inexact(map) => map.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.n_rows, self.n_cols);
        for ((row, col), value) in self.float_entries() {
            dense[(row, col)] = value;
        }
        dense
    }
}

fn check_bounds(row: usize, col: usize, n_rows: usize, n_cols: usize) -> Result<(), FrameError> {
    if row >= n_rows || col >= n_cols {
        return Err(FrameError::DimensionMismatch(format!(
            "entry ({row}, {col}) outside a {n_rows}x{n_cols} matrix"
        )));
    }
    Ok(())
}

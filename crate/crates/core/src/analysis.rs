//! Frame operators and verification.
//!
//! Exact checks (unit norms, row orthogonality, row square sums) run on
//! [`SignedRoot`] entries with no tolerance. Floating routines (frame
//! bounds, analysis, reconstruction) work on dense `f64` matrices whose
//! columns are the frame vectors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::blocks::{maximal_block_number_with_limit, EigenvalueSpec, DEFAULT_SEARCH_LIMIT};
use crate::error::FrameError;
use crate::numeric::{RadicalSum, Rational, SignedRoot};
use crate::tetris::SynthesisMatrix;

/// Absolute tolerance for floating checks on unit-scale quantities.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

/// Total number of nonzero entries, i.e. the summed support sizes of the
/// frame vectors.
pub fn sparsity(m: &SynthesisMatrix) -> usize {
    m.nnz()
}

/// Lower bound `N + 2(n - μ)` on the sparsity of any unit-norm frame with
/// this spectrum.
pub fn sparsity_bound(spec: &EigenvalueSpec) -> Result<usize, FrameError> {
    sparsity_bound_with_limit(spec, DEFAULT_SEARCH_LIMIT)
}

pub fn sparsity_bound_with_limit(spec: &EigenvalueSpec, limit: usize) -> Result<usize, FrameError> {
    let mu = maximal_block_number_with_limit(spec, limit)?.mu;
    Ok(bound_from_mu(spec.count(), spec.dim(), mu))
}

fn bound_from_mu(count: usize, dim: usize, mu: usize) -> usize {
    count + 2 * (dim - mu)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub order: usize,
    /// 0-based column indices of each group, sorted, groups ordered by
    /// their first column.
    pub columns: Vec<Vec<usize>>,
}

/// Splits the frame vectors into the largest number of groups with pairwise
/// disjoint supports: the connected components of the graph joining columns
/// that share a row.
pub fn block_decomposition(m: &SynthesisMatrix) -> Result<BlockDecomposition, FrameError> {
    let supports = m.column_supports();
    if let Some(col) = supports.iter().position(Vec::is_empty) {
        return Err(FrameError::ZeroColumn(col));
    }
    Ok(support_components(&supports, m.dim()))
}

fn support_components(supports: &[Vec<usize>], n_rows: usize) -> BlockDecomposition {
    let n_cols = supports.len();
    // columns are nodes 0..N, rows are nodes N..N+n
    let mut components = UnionFind::<usize>::new(n_cols + n_rows);
    for (col, rows) in supports.iter().enumerate() {
        for &row in rows {
            components.union(col, n_cols + row);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (col, rows) in supports.iter().enumerate() {
        if !rows.is_empty() {
            groups.entry(components.find(col)).or_default().push(col);
        }
    }
    let mut columns: Vec<Vec<usize>> = groups.into_values().collect();
    columns.sort_by_key(|g| g[0]);
    BlockDecomposition {
        order: columns.len(),
        columns,
    }
}

/// `S = T*T` with exact entries: `S[a][b]` is the inner product of rows `a`
/// and `b` of the synthesis matrix.
pub fn frame_operator_exact(m: &SynthesisMatrix) -> Result<Vec<Vec<RadicalSum>>, FrameError> {
    let rows = exact_rows(m)?;
    let n = m.dim();
    let mut op = vec![vec![RadicalSum::new(); n]; n];
    for a in 0..n {
        for b in a..n {
            let (short, long) = if rows[a].len() <= rows[b].len() {
                (&rows[a], &rows[b])
            } else {
                (&rows[b], &rows[a])
            };
            let mut sum = RadicalSum::new();
            for (col, x) in short {
                if let Some(y) = long.get(col) {
                    sum.add_term(&(*x * *y));
                }
            }
            op[b][a] = sum.clone();
            op[a][b] = sum;
        }
    }
    Ok(op)
}

fn exact_rows(m: &SynthesisMatrix) -> Result<Vec<BTreeMap<usize, &SignedRoot>>, FrameError> {
    let mut rows = vec![BTreeMap::new(); m.dim()];
    for (&(row, col), value) in m.exact_entries()? {
        rows[row].insert(col, value);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Optimal frame bounds: the extreme eigenvalues of `T*T`.
pub fn frame_bounds_float(m: &DMatrix<f64>) -> Result<FrameBounds, FrameError> {
    if m.nrows() == 0 {
        return Err(FrameError::DimensionMismatch("empty frame".into()));
    }
    let op = m * m.transpose();
    let eigen = SymmetricEigen::new(op);
    let lower = eigen.eigenvalues.min();
    let upper = eigen.eigenvalues.max();
    if upper.is_nan() || upper <= 0.0 || lower <= FLOAT_TOLERANCE * upper {
        return Err(FrameError::NotAFrame);
    }
    Ok(FrameBounds { lower, upper })
}

/// Frame coefficients `⟨x, φᵢ⟩`.
pub fn analyze_signal(m: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>, FrameError> {
    if x.len() != m.nrows() {
        return Err(FrameError::DimensionMismatch(format!(
            "signal has length {}, frame lives in dimension {}",
            x.len(),
            m.nrows()
        )));
    }
    Ok(m.tr_mul(x))
}

/// Reconstructs `x = Σ ⟨x, S⁻¹φᵢ⟩ φᵢ` by solving `S y = x` and synthesising
/// `Σ ⟨y, φᵢ⟩ φᵢ`.
pub fn reconstruct(m: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>, FrameError> {
    if x.len() != m.nrows() {
        return Err(FrameError::DimensionMismatch(format!(
            "signal has length {}, frame lives in dimension {}",
            x.len(),
            m.nrows()
        )));
    }
    let op = m * m.transpose();
    let scale = op.diagonal().amax();
    let cholesky = op.cholesky().ok_or(FrameError::NotAFrame)?;
    let pivots = cholesky.l_dirty().diagonal();
    if pivots.iter().any(|p| *p * *p <= FLOAT_TOLERANCE * scale) {
        return Err(FrameError::NotAFrame);
    }
    let y = cholesky.solve(x);
    let coefficients = analyze_signal(m, &y)?;
    Ok(m * coefficients)
}

/// Outcome of [`verify`]. Failed checks are reported here, not as errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub unit_norm_ok: bool,
    pub rows_orthogonal_ok: bool,
    pub row_sums: Vec<Rational>,
    pub spectrum_matches: bool,
    pub sparsity: usize,
    pub sparsity_bound: usize,
    pub optimal: bool,
    pub block_order: usize,
    pub mu: usize,
}

impl VerificationReport {
    /// Every frame check holds and the sparsity bound is attained.
    pub fn passed(&self) -> bool {
        self.unit_norm_ok && self.rows_orthogonal_ok && self.spectrum_matches && self.optimal
    }
}

pub fn verify(
    m: &SynthesisMatrix,
    spec: &EigenvalueSpec,
) -> Result<VerificationReport, FrameError> {
    verify_with_limit(m, spec, DEFAULT_SEARCH_LIMIT)
}

/// Checks that `m` is an optimally sparse unit-norm frame with spectrum
/// `spec`, all in exact arithmetic.
pub fn verify_with_limit(
    m: &SynthesisMatrix,
    spec: &EigenvalueSpec,
    limit: usize,
) -> Result<VerificationReport, FrameError> {
    check_dims(m, spec)?;
    let entries = m.exact_entries()?;

    let mut column_norms = vec![Rational::zero(); m.frame_count()];
    for (&(_, col), value) in entries {
        column_norms[col] += &value.square();
    }
    let unit_norm_ok = column_norms.iter().all(|norm| *norm == Rational::one());

    let op = frame_operator_exact(m)?;
    let rows_orthogonal_ok = op
        .iter()
        .enumerate()
        .all(|(a, row)| row.iter().enumerate().all(|(b, s)| a == b || s.is_zero()));

    let mut row_sums = vec![Rational::zero(); m.dim()];
    for (&(row, _), value) in entries {
        row_sums[row] += &value.square();
    }
    let spectrum_matches = spec.same_multiset(&row_sums);

    let mu = maximal_block_number_with_limit(spec, limit)?.mu;
    let sparsity_bound = bound_from_mu(spec.count(), spec.dim(), mu);
    let sparsity = sparsity(m);
    let block_order = support_components(&m.column_supports(), m.dim()).order;

    Ok(VerificationReport {
        unit_norm_ok,
        rows_orthogonal_ok,
        row_sums,
        spectrum_matches,
        sparsity,
        sparsity_bound,
        optimal: sparsity == sparsity_bound,
        block_order,
        mu,
    })
}

/// Floating counterpart of [`VerificationReport`] for matrices restored
/// from float formats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximateReport {
    pub tolerance: f64,
    pub unit_norm_ok: bool,
    pub rows_orthogonal_ok: bool,
    pub row_sums: Vec<f64>,
    pub spectrum_matches: bool,
    pub sparsity: usize,
    pub sparsity_bound: usize,
    pub optimal: bool,
    pub block_order: usize,
    pub mu: usize,
}

impl ApproximateReport {
    pub fn passed(&self) -> bool {
        self.unit_norm_ok && self.rows_orthogonal_ok && self.spectrum_matches && self.optimal
    }
}

/// Same checks as [`verify`] with an absolute tolerance; works on exact
/// and inexact matrices alike.
pub fn verify_approximate(
    m: &SynthesisMatrix,
    spec: &EigenvalueSpec,
    tolerance: f64,
    limit: usize,
) -> Result<ApproximateReport, FrameError> {
    check_dims(m, spec)?;
    let dense = m.to_dense();
    let op = &dense * dense.transpose();

    let unit_norm_ok = dense
        .column_iter()
        .all(|c| (c.norm_squared() - 1.0).abs() <= tolerance);
    let n = m.dim();
    let rows_orthogonal_ok =
        (0..n).all(|a| (0..n).all(|b| a == b || op[(a, b)].abs() <= tolerance));
    let row_sums: Vec<f64> = (0..n).map(|a| op[(a, a)]).collect();

    let mut expected: Vec<f64> = spec.lambdas().iter().map(Rational::to_f64).collect();
    let mut observed = row_sums.clone();
    expected.sort_by(f64::total_cmp);
    observed.sort_by(f64::total_cmp);
    let spectrum_matches = expected
        .iter()
        .zip(&observed)
        .all(|(e, o)| (e - o).abs() <= tolerance);

    let mu = maximal_block_number_with_limit(spec, limit)?.mu;
    let sparsity_bound = bound_from_mu(spec.count(), spec.dim(), mu);
    let sparsity = sparsity(m);
    Ok(ApproximateReport {
        tolerance,
        unit_norm_ok,
        rows_orthogonal_ok,
        row_sums,
        spectrum_matches,
        sparsity,
        sparsity_bound,
        optimal: sparsity == sparsity_bound,
        block_order: support_components(&m.column_supports(), n).order,
        mu,
    })
}

fn check_dims(m: &SynthesisMatrix, spec: &EigenvalueSpec) -> Result<(), FrameError> {
    if m.dim() != spec.dim() || m.frame_count() != spec.count() {
        return Err(FrameError::DimensionMismatch(format!(
            "matrix is {}x{}, spectrum needs {}x{}",
            m.dim(),
            m.frame_count(),
            spec.dim(),
            spec.count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Sign;
    use crate::tetris::{construct_optimal, spectral_tetris};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn cursor_spec() -> EigenvalueSpec {
        EigenvalueSpec::new(vec![q(8, 3), q(8, 3), q(8, 3), q(2, 1)], 10).unwrap()
    }

    fn identity(n: usize) -> SynthesisMatrix {
        SynthesisMatrix::from_exact(n, n, (0..n).map(|i| ((i, i), SignedRoot::one()))).unwrap()
    }

    #[test]
    fn sparsity_examples() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        assert_eq!(sparsity(&m), 14);
        assert_eq!(sparsity(&identity(5)), 5);
        assert_eq!(sparsity_bound(&cursor_spec()).unwrap(), 14);
        assert_eq!(
            sparsity_bound(&EigenvalueSpec::tight(9, 4).unwrap()).unwrap(),
            15
        );
        assert_eq!(
            sparsity_bound(&EigenvalueSpec::tight(10, 5).unwrap()).unwrap(),
            10
        );
    }

    #[test]
    fn block_decomposition_examples() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        let blocks = block_decomposition(&m).unwrap();
        assert_eq!(blocks.order, 2);
        assert_eq!(blocks.columns, vec![(0..8).collect::<Vec<_>>(), vec![8, 9]]);
        assert_eq!(block_decomposition(&identity(4)).unwrap().order, 4);
        let tight = construct_optimal(&EigenvalueSpec::tight(9, 4).unwrap())
            .unwrap()
            .matrix;
        assert_eq!(block_decomposition(&tight).unwrap().order, 1);
    }

    #[test]
    fn block_decomposition_rejects_zero_column() {
        let m = SynthesisMatrix::from_exact(2, 2, [((0, 0), SignedRoot::one())]).unwrap();
        assert!(matches!(
            block_decomposition(&m),
            Err(FrameError::ZeroColumn(1))
        ));
    }

    #[test]
    fn frame_operator_is_diagonal() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        let op = frame_operator_exact(&m).unwrap();
        let expected = [q(8, 3), q(8, 3), q(8, 3), q(2, 1)];
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    assert_eq!(op[a][a].as_rational(), Some(expected[a].clone()));
                } else {
                    assert!(op[a][b].is_zero(), "S[{a}][{b}] = {:?}", op[a][b]);
                }
            }
        }
        let rank_one = SynthesisMatrix::from_exact(2, 1, [((0, 0), SignedRoot::one())]).unwrap();
        let op = frame_operator_exact(&rank_one).unwrap();
        assert_eq!(op[0][0].as_rational(), Some(q(1, 1)));
        assert!(op[1][1].is_zero());
    }

    #[test]
    fn bounds_and_rank_deficiency() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix.to_dense();
        let bounds = frame_bounds_float(&m).unwrap();
        assert!((bounds.lower - 2.0).abs() < 1e-10);
        assert!((bounds.upper - 8.0 / 3.0).abs() < 1e-10);
        let onb = frame_bounds_float(&DMatrix::identity(3, 3)).unwrap();
        assert!((onb.lower - 1.0).abs() < 1e-12 && (onb.upper - 1.0).abs() < 1e-12);

        let flat = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            frame_bounds_float(&flat),
            Err(FrameError::NotAFrame)
        ));
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(reconstruct(&flat, &x), Err(FrameError::NotAFrame)));
    }

    #[test]
    fn analysis_reads_rows() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix.to_dense();
        let third = (1.0f64 / 3.0).sqrt();
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let coeffs = analyze_signal(&m, &e1).unwrap();
        let mut expected = vec![0.0; 10];
        expected[..4].copy_from_slice(&[1.0, 1.0, third, third]);
        assert!((coeffs - DVector::from_vec(expected)).amax() < 1e-15);

        let e4 = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
        let coeffs = analyze_signal(&m, &e4).unwrap();
        let mut expected = vec![0.0; 10];
        expected[8] = 1.0;
        expected[9] = 1.0;
        assert_eq!(coeffs, DVector::from_vec(expected));

        assert_eq!(
            analyze_signal(&m, &DVector::zeros(4)).unwrap(),
            DVector::zeros(10)
        );
        assert!(analyze_signal(&m, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn tight_reconstruction_is_scaled_synthesis() {
        let m = construct_optimal(&EigenvalueSpec::tight(9, 4).unwrap())
            .unwrap()
            .matrix
            .to_dense();
        let x = DVector::from_vec(vec![0.3, -1.2, 2.5, 0.7]);
        let via_solve = reconstruct(&m, &x).unwrap();
        let via_tight = (&m * analyze_signal(&m, &x).unwrap()) / 2.25;
        assert!((&via_solve - &via_tight).norm() <= 1e-12 * x.norm());
        assert!((&via_solve - &x).norm() <= 1e-10 * x.norm());

        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let r = reconstruct(&DMatrix::identity(3, 3), &e1).unwrap();
        assert!((r - e1).amax() < 1e-15);
    }

    #[test]
    fn verify_generated_frame() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        let report = verify(&m, &cursor_spec()).unwrap();
        assert!(report.passed());
        assert_eq!(report.sparsity, 14);
        assert_eq!(report.block_order, 2);
        assert_eq!(report.mu, 2);
        assert_eq!(report.row_sums, vec![q(8, 3), q(8, 3), q(8, 3), q(2, 1)]);
    }

    #[test]
    fn verify_detects_scaled_column() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        let mut entries = m.exact_entries().unwrap().clone();
        let half = SignedRoot::of(Sign::Plus, &q(1, 4)).unwrap();
        let scaled = &entries[&(0, 0)] * &half;
        entries.insert((0, 0), scaled);
        let tampered = SynthesisMatrix::from_exact(4, 10, entries).unwrap();
        let report = verify(&tampered, &cursor_spec()).unwrap();
        assert!(!report.unit_norm_ok);
        assert!(!report.spectrum_matches);
        assert!(!report.passed());
    }

    #[test]
    fn verify_detects_flipped_sign() {
        let m = construct_optimal(&cursor_spec()).unwrap().matrix;
        let mut entries = m.exact_entries().unwrap().clone();
        let flipped = -entries[&(1, 3)].clone();
        entries.insert((1, 3), flipped);
        let tampered = SynthesisMatrix::from_exact(4, 10, entries).unwrap();
        let report = verify(&tampered, &cursor_spec()).unwrap();
        assert!(report.unit_norm_ok);
        assert!(!report.rows_orthogonal_ok);
    }

    #[test]
    fn verify_non_blockwise_ordering() {
        // μ{5/2,5/2,2,2} = 3 (blocks {5/2,5/2},{2},{2}), bound 9 + 2 = 11.
        // Ordering 5/2,2,5/2,2 has integer prefix sums only at 7 and 9 and
        // builds two 2x2 blocks: 9 + 2·2 = 13 nonzeros.
        let lambdas = vec![q(5, 2), q(2, 1), q(5, 2), q(2, 1)];
        let spec = EigenvalueSpec::new(lambdas.clone(), 9).unwrap();
        let (m, _) = spectral_tetris(&spec, &lambdas).unwrap();
        let report = verify(&m, &spec).unwrap();
        assert_eq!(report.mu, 3);
        assert_eq!(report.sparsity_bound, 11);
        assert_eq!(report.sparsity, 13);
        assert!(!report.optimal);
        assert!(report.unit_norm_ok && report.rows_orthogonal_ok && report.spectrum_matches);
    }

    #[test]
    fn verify_refuses_inexact_and_mismatched() {
        let m = SynthesisMatrix::from_inexact(2, 4, [((0, 0), 1.0)]).unwrap();
        let spec = EigenvalueSpec::tight(4, 2).unwrap();
        assert!(matches!(verify(&m, &spec), Err(FrameError::Inexact)));
        let m = identity(2);
        assert!(matches!(
            verify(&m, &spec),
            Err(FrameError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn approximate_verification_matches_exact() {
        let spec = cursor_spec();
        let m = construct_optimal(&spec).unwrap().matrix;
        let dense = m.float_entries();
        let inexact = SynthesisMatrix::from_inexact(4, 10, dense).unwrap();
        let report = verify_approximate(&inexact, &spec, FLOAT_TOLERANCE, 16).unwrap();
        assert!(report.passed());
        assert_eq!(report.block_order, 2);
    }
}

//! Maximal block number and blockwise orderings of a spectrum.
//!
//! For a sequence `λ₁, …, λₙ` the maximal block number `μ` is the largest
//! number of integer prefix sums over all orderings. An ordering attaining
//! it splits into `μ` consecutive blocks, each with an integer sum and no
//! integer-valued proper prefix.
//!
//! Finding `μ` amounts to partitioning the non-integer eigenvalues into as
//! many groups with integer sum as possible; integer eigenvalues always form
//! their own blocks. The partition is found exactly with a dynamic program
//! over subsets, so the number of non-integer eigenvalues is capped.

use std::cmp::Reverse;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::FrameError;
use crate::numeric::Rational;

/// Default cap on the number of non-integer eigenvalues for the exact search.
pub const DEFAULT_SEARCH_LIMIT: usize = 16;

/// Largest sequence length accepted by [`mu_bruteforce`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Hard ceiling for the subset search regardless of the configured limit.
const SUBSET_SEARCH_CEILING: usize = 24;

/// The multiset `{λ₁, …, λₙ}` together with the frame count `N = Σλⱼ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenvalueSpec {
    lambdas: Vec<Rational>,
    count: usize,
}

impl EigenvalueSpec {
    /// Checks `n ≥ 1`, every `λⱼ ≥ 2` and `Σλⱼ = N`.
    pub fn new(lambdas: Vec<Rational>, count: usize) -> Result<Self, FrameError> {
        if lambdas.is_empty() {
            return Err(FrameError::InvalidSpec(
                "at least one eigenvalue is required (n >= 1)".into(),
            ));
        }
        let two = Rational::from(2);
        if let Some((j, lambda)) = lambdas.iter().enumerate().find(|(_, l)| **l < two) {
            return Err(FrameError::InvalidSpec(format!(
                "eigenvalue lambda_{} = {} is below 2",
                j + 1,
                lambda
            )));
        }
        let total: Rational = lambdas.iter().sum();
        if total != Rational::from_integer(count as u64) {
            return Err(FrameError::InvalidSpec(format!(
                "eigenvalues sum to {total}, expected N = {count}"
            )));
        }
        Ok(EigenvalueSpec { lambdas, count })
    }

    /// Like [`EigenvalueSpec::new`] with `N` taken from the sum, which must
    /// be an integer.
    pub fn from_lambdas(lambdas: Vec<Rational>) -> Result<Self, FrameError> {
        let total: Rational = lambdas.iter().sum();
        let count = total
            .to_integer()
            .and_then(|t| t.to_usize())
            .ok_or_else(|| {
                FrameError::InvalidSpec(format!("eigenvalues sum to {total}, not an integer N"))
            })?;
        EigenvalueSpec::new(lambdas, count)
    }

    /// The tight spectrum `λⱼ = N/n` for all `j`; needs `N ≥ 2n`.
    pub fn tight(count: usize, dim: usize) -> Result<Self, FrameError> {
        if dim == 0 {
            return Err(FrameError::InvalidSpec(
                "dimension n must be at least 1".into(),
            ));
        }
        if count < 2 * dim {
            return Err(FrameError::InvalidSpec(format!(
                "tight frame needs N >= 2n, got N = {count}, n = {dim}"
            )));
        }
        let lambda = Rational::new(count as u64, dim as u64);
        EigenvalueSpec::new(vec![lambda; dim], count)
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Number of frame vectors `N`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Whether `other` holds the same eigenvalues with the same multiplicities.
    pub fn same_multiset(&self, other: &[Rational]) -> bool {
        let mut a = self.lambdas.clone();
        let mut b = other.to_vec();
        a.sort();
        b.sort();
        a == b
    }
}

/// A blockwise ordering attaining `μ`, with its block boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    pub mu: usize,
    pub ordering: Vec<Rational>,
    /// `k₁ < … < k_μ = n`: block `i` covers ordered rows `k_{i-1}..k_i`.
    pub row_bounds: Vec<usize>,
    /// `m₁ < … < m_μ = N`: the integer prefix sums at the row bounds.
    pub column_bounds: Vec<usize>,
}

impl BlockStructure {
    /// Ordered eigenvalues of each block.
    pub fn blocks(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        std::iter::once(0)
            .chain(self.row_bounds.iter().copied())
            .tuple_windows()
            .map(move |(start, end)| &self.ordering[start..end])
    }
}

/// Number of positions `s` at which `λ₁ + … + λ_s` is an integer.
pub fn count_integer_prefix_sums(lambdas: &[Rational]) -> usize {
    let mut total = Rational::zero();
    let mut hits = 0;
    for lambda in lambdas {
        total += lambda;
        if total.is_integer() {
            hits += 1;
        }
    }
    hits
}

/// Maximum of [`count_integer_prefix_sums`] over every permutation.
pub fn mu_bruteforce(lambdas: &[Rational]) -> Result<usize, FrameError> {
    if lambdas.len() > BRUTE_FORCE_MAX {
        return Err(FrameError::BruteForceTooLarge {
            len: lambdas.len(),
            max: BRUTE_FORCE_MAX,
        });
    }
    Ok(lambdas
        .iter()
        .cloned()
        .permutations(lambdas.len())
        .map(|perm| count_integer_prefix_sums(&perm))
        .max()
        .unwrap_or(0))
}

/// `μ(N/n, …, N/n) = gcd(N, n)`.
pub fn mu_tight(count: usize, dim: usize) -> Result<usize, FrameError> {
    if dim == 0 || count < 2 * dim {
        return Err(FrameError::InvalidSpec(format!(
            "tight frame needs N >= 2n >= 2, got N = {count}, n = {dim}"
        )));
    }
    Ok(count.gcd(&dim))
}

pub fn maximal_block_number(spec: &EigenvalueSpec) -> Result<BlockStructure, FrameError> {
    maximal_block_number_with_limit(spec, DEFAULT_SEARCH_LIMIT)
}

/// Computes `μ` and the canonical blockwise ordering.
///
/// Blocks are listed by descending size, ties broken by comparing their
/// ascending-sorted eigenvalue lists; eigenvalues inside a block are in
/// descending order. The result depends only on the multiset.
pub fn maximal_block_number_with_limit(
    spec: &EigenvalueSpec,
    limit: usize,
) -> Result<BlockStructure, FrameError> {
    let (integral, mut fractional): (Vec<Rational>, Vec<Rational>) = spec
        .lambdas()
        .iter()
        .cloned()
        .partition(Rational::is_integer);
    if fractional.len() > limit.min(SUBSET_SEARCH_CEILING) {
        return Err(FrameError::SearchLimit {
            fractional: fractional.len(),
            limit: limit.min(SUBSET_SEARCH_CEILING),
        });
    }
    fractional.sort();

    let mut blocks: Vec<Vec<Rational>> = integral.into_iter().map(|l| vec![l]).collect();
    for mask in partition_into_integer_groups(&fractional)? {
        let group = (0..fractional.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| fractional[i].clone())
            .collect();
        blocks.push(group);
    }

    let mut keyed: Vec<(Vec<Rational>, Vec<Rational>)> = blocks
        .into_iter()
        .map(|mut block| {
            block.sort();
            let key = block.clone();
            block.reverse();
            (key, block)
        })
        .collect();
    keyed.sort_by(|(ka, _), (kb, _)| (Reverse(ka.len()), ka).cmp(&(Reverse(kb.len()), kb)));

    let mu = keyed.len();
    let mut ordering = Vec::with_capacity(spec.dim());
    let mut row_bounds = Vec::with_capacity(mu);
    let mut column_bounds = Vec::with_capacity(mu);
    let mut total = Rational::zero();
    for (_, block) in keyed {
        for lambda in block {
            total += &lambda;
            ordering.push(lambda);
        }
        row_bounds.push(ordering.len());
        let m = total
            .to_integer()
            .and_then(|t| t.to_usize())
            .ok_or_else(|| FrameError::Internal(format!("block sum {total} is not an integer")))?;
        column_bounds.push(m);
    }

    Ok(BlockStructure {
        mu,
        ordering,
        row_bounds,
        column_bounds,
    })
}

/// Flags, for every subset mask of `values`, whether its sum is an integer.
fn integral_subsets(values: &[Rational]) -> Vec<bool> {
    let size = 1usize << values.len();
    let modulus = values
        .iter()
        .fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    let residues: Vec<BigInt> = values
        .iter()
        .map(|v| {
            (v.fract_part() * Rational::from_integer(modulus.clone()))
                .to_integer()
                .expect("common denominator clears fractions")
        })
        .collect();

    let mut flags = vec![false; size];
    flags[0] = true;
    if let (Some(modulus), Some(residues)) = (
        modulus.to_u64(),
        residues
            .iter()
            .map(|r| r.to_u64())
            .collect::<Option<Vec<u64>>>(),
    ) {
        let modulus = u128::from(modulus);
        let mut sums = vec![0u64; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let s = (u128::from(sums[mask & (mask - 1)]) + u128::from(residues[low])) % modulus;
            flags[mask] = s == 0;
            sums[mask] = s as u64;
        }
    } else {
        for (mask, flag) in flags.iter_mut().enumerate().skip(1) {
            let s: BigInt = (0..values.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &residues[i])
                .sum();
            *flag = (s % &modulus).is_zero();
        }
    }
    flags
}

/// Splits `values` (sorted, none integral, integral total) into the largest
/// number of groups with integer sums. Returns the groups as bit masks.
fn partition_into_integer_groups(values: &[Rational]) -> Result<Vec<u32>, FrameError> {
    let m = values.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let full = (1u32 << m) - 1;
    let integral_sum = integral_subsets(values);
    let size = integral_sum.len();
    if !integral_sum[full as usize] {
        return Err(FrameError::InvalidSpec(
            "non-integer eigenvalues do not sum to an integer".into(),
        ));
    }

    // best[S] = most groups covering S exactly; only integral S are reachable.
    // Each group contains the lowest element of S, so every partition is
    // visited once.
    let mut best = vec![-1i16; size];
    let mut choice = vec![0u32; size];
    best[0] = 0;
    for mask in 1..size {
        if !integral_sum[mask] {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let group = sub | low;
            if integral_sum[group] {
                let remainder = mask ^ group;
                if best[remainder] >= 0 && best[remainder] + 1 > best[mask] {
                    best[mask] = best[remainder] + 1;
                    choice[mask] = group as u32;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    let mut groups = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let group = choice[mask as usize];
        groups.push(group);
        mask ^= group;
    }
    Ok(groups)
}

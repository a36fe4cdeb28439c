#![allow(dead_code)]

use rand::Rng;
use spectral_tetris::{EigenvalueSpec, Rational, Sign, SignedRoot, SynthesisMatrix};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// `±√(num/den)`; `sign` is +1 or -1, `num = 0` gives zero.
pub fn root(sign: i64, num: i64, den: i64) -> SignedRoot {
    let sign = Sign::from_i64(sign).expect("sign is ±1");
    SignedRoot::of(sign, &q(num, den)).expect("non-negative")
}

/// Random spectrum: `n ≤ max_n` eigenvalues `2 + k + a/d` with `d ≤ max_den`,
/// the last one shifted so the total is an integer. Half of the specs share
/// one denominator so that integer-sum subsets are common.
pub fn random_spec<R: Rng>(rng: &mut R, max_n: usize, max_den: i64) -> EigenvalueSpec {
    let n = rng.gen_range(1..=max_n);
    let palette = [2i64, 3, 4, 6, 12];
    let shared = if rng.gen_bool(0.5) {
        let choices: Vec<i64> = palette.iter().copied().filter(|d| *d <= max_den).collect();
        Some(choices[rng.gen_range(0..choices.len())])
    } else {
        None
    };
    let mut lambdas: Vec<Rational> = (0..n)
        .map(|_| {
            let d = shared.unwrap_or_else(|| rng.gen_range(1..=max_den));
            let a = rng.gen_range(0..d);
            let k = rng.gen_range(0..=2);
            Rational::from(2 + k) + q(a, d)
        })
        .collect();
    let total: Rational = lambdas.iter().sum();
    let fix = (Rational::one() - total.fract_part()).fract_part();
    let last = lambdas.last_mut().unwrap();
    *last = &*last + fix;
    EigenvalueSpec::from_lambdas(lambdas).expect("generated spectrum is valid")
}

/// Final matrix of the cursor walkthrough for `(10; 8/3, 8/3, 8/3, 2)`.
pub fn golden_cursor_matrix() -> SynthesisMatrix {
    let z = || root(1, 0, 1);
    let one = || root(1, 1, 1);
    let rows = vec![
        vec![
            one(),
            one(),
            root(1, 1, 3),
            root(1, 1, 3),
            z(),
            z(),
            z(),
            z(),
            z(),
            z(),
        ],
        vec![
            z(),
            z(),
            root(1, 2, 3),
            root(-1, 2, 3),
            one(),
            root(1, 1, 6),
            root(1, 1, 6),
            z(),
            z(),
            z(),
        ],
        vec![
            z(),
            z(),
            z(),
            z(),
            z(),
            root(1, 5, 6),
            root(-1, 5, 6),
            one(),
            z(),
            z(),
        ],
        vec![z(), z(), z(), z(), z(), z(), z(), z(), one(), one()],
    ];
    SynthesisMatrix::from_rows(rows).unwrap()
}

/// The Spectral Tetris member of `(9; 9/4 ×4)`.
pub fn golden_tight_matrix() -> SynthesisMatrix {
    let z = || root(1, 0, 1);
    let one = || root(1, 1, 1);
    let rows = vec![
        vec![
            one(),
            one(),
            root(1, 1, 8),
            root(1, 1, 8),
            z(),
            z(),
            z(),
            z(),
            z(),
        ],
        vec![
            z(),
            z(),
            root(1, 7, 8),
            root(-1, 7, 8),
            root(1, 1, 4),
            root(1, 1, 4),
            z(),
            z(),
            z(),
        ],
        vec![
            z(),
            z(),
            z(),
            z(),
            root(1, 3, 4),
            root(-1, 3, 4),
            root(1, 3, 8),
            root(1, 3, 8),
            z(),
        ],
        vec![
            z(),
            z(),
            z(),
            z(),
            z(),
            z(),
            root(1, 5, 8),
            root(-1, 5, 8),
            one(),
        ],
    ];
    SynthesisMatrix::from_rows(rows).unwrap()
}

/// A second optimally sparse member of `(9; 9/4 ×4)` that Spectral Tetris
/// does not produce.
pub fn alternative_tight_matrix() -> SynthesisMatrix {
    let z = || root(1, 0, 1);
    let one = || root(1, 1, 1);
    let rows = vec![
        vec![
            one(),
            root(1, 5, 8),
            root(1, 5, 8),
            z(),
            z(),
            z(),
            z(),
            z(),
            z(),
        ],
        vec![
            z(),
            root(1, 3, 8),
            root(-1, 3, 8),
            root(1, 3, 8),
            root(1, 3, 8),
            root(1, 3, 8),
            root(1, 3, 8),
            z(),
            z(),
        ],
        vec![
            z(),
            z(),
            z(),
            root(1, 5, 8),
            root(-1, 5, 8),
            z(),
            z(),
            one(),
            z(),
        ],
        vec![
            z(),
            z(),
            z(),
            z(),
            z(),
            root(1, 5, 8),
            root(-1, 5, 8),
            z(),
            one(),
        ],
    ];
    SynthesisMatrix::from_rows(rows).unwrap()
}

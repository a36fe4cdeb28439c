//! Exact arithmetic: rationals, signed square roots of rationals, and
//! finite sums of rational multiples of square roots.
//!
//! Every entry produced by the construction is `±√q` for a rational `q`,
//! so these three types are enough to check unit norms, row sums and row
//! orthogonality without any floating tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("malformed number {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("square root of negative value {0}")]
    NegativeRadicand(Rational),
}

/// Exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Panics if `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    /// `self - floor(self)`, always in `[0, 1)`.
    pub fn fract_part(&self) -> Self {
        Rational(&self.0 - self.0.floor())
    }

    /// The value as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `"p"`, `"p/q"` or a terminating decimal such as `"2.25"`.
    pub fn parse(text: &str) -> Result<Self, NumericError> {
        let malformed = || NumericError::Malformed(text.to_string());
        let s = text.trim();
        if s.is_empty() {
            return Err(malformed());
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = parse_int(num).ok_or_else(malformed)?;
            let den = parse_int(den).ok_or_else(malformed)?;
            if den.is_zero() {
                return Err(NumericError::ZeroDenominator(text.to_string()));
            }
            return Ok(Rational::new(num, den));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let (negative, digits) = match int_part.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
            };
            let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
            if (digits.is_empty() && frac_part.is_empty())
                || !all_digits(digits)
                || !all_digits(frac_part)
            {
                return Err(malformed());
            }
            let joined = format!("{digits}{frac_part}");
            let mantissa: BigInt = if joined.is_empty() {
                BigInt::zero()
            } else {
                joined.parse().map_err(|_| malformed())?
            };
            let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
            let value = Rational::new(mantissa, scale);
            return Ok(if negative { -value } else { value });
        }
        parse_int(s)
            .map(Rational::from_integer)
            .ok_or_else(malformed)
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<BigInt> for Rational {
    fn from(value: BigInt) -> Self {
        Rational::from_integer(value)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i64(value: i64) -> Option<Sign> {
        match value {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Splits `n` into `(outer, core)` with `n = outer² · core` and `core` squarefree.
///
/// Trial division; radicands here are small products of eigenvalue
/// numerators and denominators.
pub fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    if let Some(small) = n.to_u64() {
        let (outer, core) = squarefree_split_u64(small);
        return (BigUint::from(outer), BigUint::from(core));
    }
    let mut rest = n.clone();
    let mut outer = BigUint::one();
    let mut core = BigUint::one();
    let mut p = BigUint::from(2u32);
    while &p * &p <= rest {
        let sq = &p * &p;
        while (&rest % &sq).is_zero() {
            rest /= &sq;
            outer *= &p;
        }
        if (&rest % &p).is_zero() {
            rest /= &p;
            core *= &p;
        }
        p += 1u32;
    }
    (outer, core * rest)
}

fn squarefree_split_u64(mut rest: u64) -> (u64, u64) {
    let mut outer = 1u64;
    let mut core = 1u64;
    let mut p = 2u64;
    while p.checked_mul(p).is_some_and(|sq| sq <= rest) {
        let sq = p * p;
        while rest.is_multiple_of(sq) {
            rest /= sq;
            outer *= p;
        }
        if rest.is_multiple_of(p) {
            rest /= p;
            core *= p;
        }
        p += 1;
    }
    (outer, core * rest)
}

/// `coefficient · √radicand` with a squarefree radicand.
///
/// Zero is stored as `0·√1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedRoot {
    coefficient: Rational,
    radicand: BigUint,
}

impl SignedRoot {
    /// Builds `coefficient · √radicand`, moving square factors of the
    /// radicand into the coefficient.
    pub fn new(coefficient: Rational, radicand: BigUint) -> Self {
        if coefficient.is_zero() || radicand.is_zero() {
            return SignedRoot::zero();
        }
        let (outer, core) = squarefree_split(&radicand);
        SignedRoot {
            coefficient: coefficient * Rational::from_integer(BigInt::from(outer)),
            radicand: core,
        }
    }

    pub fn zero() -> Self {
        SignedRoot {
            coefficient: Rational::zero(),
            radicand: BigUint::one(),
        }
    }

    pub fn one() -> Self {
        SignedRoot {
            coefficient: Rational::one(),
            radicand: BigUint::one(),
        }
    }

    /// `sign · √value`. `√(p/q)` is rewritten as `(1/q)·√(p·q)` before the
    /// square part of `p·q` is extracted.
    pub fn of(sign: Sign, value: &Rational) -> Result<Self, NumericError> {
        if value.is_negative() {
            return Err(NumericError::NegativeRadicand(value.clone()));
        }
        if value.is_zero() {
            return Ok(SignedRoot::zero());
        }
        let p = value.numer().magnitude();
        let q = value.denom().magnitude();
        let root = SignedRoot::new(Rational::new(1, BigInt::from(q.clone())), p * q);
        Ok(match sign {
            Sign::Plus => root,
            Sign::Minus => -root,
        })
    }

    pub fn coefficient(&self) -> &Rational {
        &self.coefficient
    }

    pub fn radicand(&self) -> &BigUint {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Sign of a nonzero value; zero reports `Plus`.
    pub fn sign(&self) -> Sign {
        if self.coefficient.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// Exact square `c²·d`.
    pub fn square(&self) -> Rational {
        &self.coefficient
            * &self.coefficient
            * Rational::from_integer(BigInt::from(self.radicand.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        let magnitude = self.square().to_f64().sqrt();
        match self.sign() {
            Sign::Plus => magnitude,
            Sign::Minus => -magnitude,
        }
    }

    /// Parses the `c*sqrt(d)` rendering.
    pub fn parse(text: &str) -> Result<Self, NumericError> {
        let malformed = || NumericError::Malformed(text.to_string());
        let (coef, rest) = text.trim().split_once("*sqrt(").ok_or_else(malformed)?;
        let radicand = rest.strip_suffix(')').ok_or_else(malformed)?;
        let coefficient = Rational::parse(coef)?;
        if radicand.is_empty() || !radicand.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let radicand: BigUint = radicand.parse().map_err(|_| malformed())?;
        Ok(SignedRoot::new(coefficient, radicand))
    }
}

impl Mul for &SignedRoot {
    type Output = SignedRoot;

    /// `√a·√b = g·√((a/g)(b/g))` with `g = gcd(a, b)`; the two cofactors are
    /// coprime and squarefree, so the product radicand is squarefree.
    fn mul(self, rhs: &SignedRoot) -> SignedRoot {
        if self.is_zero() || rhs.is_zero() {
            return SignedRoot::zero();
        }
        let g = self.radicand.gcd(&rhs.radicand);
        let radicand = (&self.radicand / &g) * (&rhs.radicand / &g);
        SignedRoot {
            coefficient: &self.coefficient
                * &rhs.coefficient
                * Rational::from_integer(BigInt::from(g)),
            radicand,
        }
    }
}

impl Mul for SignedRoot {
    type Output = SignedRoot;
    fn mul(self, rhs: SignedRoot) -> SignedRoot {
        &self * &rhs
    }
}

impl Neg for SignedRoot {
    type Output = SignedRoot;
    fn neg(self) -> SignedRoot {
        if self.is_zero() {
            return self;
        }
        SignedRoot {
            coefficient: -self.coefficient,
            radicand: self.radicand,
        }
    }
}

impl fmt::Display for SignedRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*sqrt({})", self.coefficient, self.radicand)
    }
}

impl fmt::Debug for SignedRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SignedRoot {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SignedRoot::parse(s)
    }
}

/// `Σ cᵢ·√dᵢ` over distinct squarefree `dᵢ`, with no zero coefficients.
///
/// Square roots of distinct squarefree integers are linearly independent
/// over the rationals, so the sum is zero exactly when no terms remain.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct RadicalSum {
    terms: BTreeMap<BigUint, Rational>,
}

impl RadicalSum {
    pub fn new() -> Self {
        RadicalSum::default()
    }

    pub fn terms(&self) -> &BTreeMap<BigUint, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, term: &SignedRoot) {
        if term.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(term.radicand.clone())
            .or_insert_with(Rational::zero);
        *slot += &term.coefficient;
        if slot.is_zero() {
            self.terms.remove(&term.radicand);
        }
    }

    pub fn plus(mut self, term: &SignedRoot) -> Self {
        self.add_term(term);
        self
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(d, c)| c.to_f64() * d.to_f64().unwrap_or(f64::NAN).sqrt())
            .sum()
    }
}

impl fmt::Debug for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(d, c)| format!("{c}*sqrt({d})"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn root(c: Rational, d: u64) -> SignedRoot {
        SignedRoot::new(c, BigUint::from(d))
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Rational::parse("8/3").unwrap(), q(8, 3));
        assert_eq!(Rational::parse("2").unwrap(), q(2, 1));
        assert_eq!(Rational::parse("2.25").unwrap(), q(9, 4));
        assert_eq!(Rational::parse("-0.5").unwrap(), q(-1, 2));
        assert_eq!(Rational::parse(".5").unwrap(), q(1, 2));
        assert_eq!(Rational::parse("6/4").unwrap(), q(3, 2));
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "", "a", "1/", "/2", "1.2.3", "1/2/3", "--1", ".", "1e3", "2 /3x",
        ] {
            assert!(
                matches!(Rational::parse(bad), Err(NumericError::Malformed(_))),
                "{bad:?}"
            );
        }
        assert!(matches!(
            Rational::parse("3/0"),
            Err(NumericError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn render_round_trip() {
        for text in ["8/3", "2", "-7/12", "0", "123456789012345678901234567891/2"] {
            assert_eq!(Rational::parse(text).unwrap().to_string(), text);
        }
        for text in [
            "1/3*sqrt(3)",
            "-1/6*sqrt(30)",
            "1*sqrt(1)",
            "0*sqrt(1)",
            "2*sqrt(2)",
        ] {
            assert_eq!(SignedRoot::parse(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(q(8, 3).floor(), q(2, 1));
        assert_eq!(q(8, 3).fract_part(), q(2, 3));
        assert_eq!(q(-1, 3).floor(), q(-1, 1));
        assert_eq!(q(-1, 3).fract_part(), q(2, 3));
        assert!(q(4, 2).is_integer());
    }

    #[test]
    fn signed_root_examples() {
        let a = SignedRoot::of(Sign::Plus, &q(1, 3)).unwrap();
        assert_eq!(a, root(q(1, 3), 3));
        assert_eq!(a.square(), q(1, 3));

        assert_eq!(
            SignedRoot::of(Sign::Plus, &q(1, 1)).unwrap(),
            SignedRoot::one()
        );

        let b = SignedRoot::of(Sign::Minus, &q(5, 6)).unwrap();
        assert_eq!(b.coefficient(), &q(-1, 6));
        assert_eq!(b.radicand(), &BigUint::from(30u32));
        assert_eq!(b.square(), q(5, 6));
    }

    #[test]
    fn signed_root_rejects_negative() {
        assert!(matches!(
            SignedRoot::of(Sign::Plus, &q(-1, 2)),
            Err(NumericError::NegativeRadicand(_))
        ));
    }

    #[test]
    fn signed_root_of_zero_is_canonical_zero() {
        let z = SignedRoot::of(Sign::Minus, &Rational::zero()).unwrap();
        assert_eq!(z, SignedRoot::zero());
        assert_eq!(z.to_string(), "0*sqrt(1)");
    }

    #[test]
    fn mul_examples() {
        let a = root(q(1, 3), 3);
        let b = root(q(1, 3), 6);
        assert_eq!(&a * &b, root(q(1, 3), 2));
        assert_eq!((&a * &b).square(), q(2, 9));
        assert_eq!(&a * &SignedRoot::zero(), SignedRoot::zero());
        assert_eq!(&a * &a, root(q(1, 3), 1));
    }

    #[test]
    fn radical_sum_examples() {
        let s = RadicalSum::new().plus(&root(q(1, 3), 2));
        assert!(s.clone().plus(&root(q(-1, 3), 2)).is_zero());

        let t = RadicalSum::new().plus(&root(q(1, 2), 5));
        assert_eq!(t.terms().len(), 1);
        assert_eq!(t.terms()[&BigUint::from(5u32)], q(1, 2));

        let u = s.plus(&root(q(1, 3), 3));
        assert_eq!(u.terms().len(), 2);
        assert_eq!(u.terms()[&BigUint::from(2u32)], q(1, 3));
        assert_eq!(u.terms()[&BigUint::from(3u32)], q(1, 3));
    }

    #[test]
    fn float_values() {
        assert!((q(8, 3).to_f64() - 2.666_666_666_666_666_5).abs() < 1e-15);
        // √(1/3) = 0.5773502691896257645...
        assert!((root(q(1, 3), 3).to_f64() - 0.577_350_269_189_625_8).abs() < 1e-15);
        assert_eq!(RadicalSum::new().to_f64(), 0.0);
    }

    #[test]
    fn squarefree_split_small() {
        let split = |n: u64| {
            let (o, c) = squarefree_split(&BigUint::from(n));
            (o.to_u64().unwrap(), c.to_u64().unwrap())
        };
        assert_eq!(split(1), (1, 1));
        assert_eq!(split(12), (2, 3));
        assert_eq!(split(72), (6, 2));
        assert_eq!(split(30), (1, 30));
        assert_eq!(split(49), (7, 1));
    }

    #[test]
    fn squarefree_split_big_path() {
        // 2^70 · 3 exceeds u64
        let n = BigUint::from(3u32) << 70;
        let (o, c) = squarefree_split(&n);
        assert_eq!(o, BigUint::one() << 35);
        assert_eq!(c, BigUint::from(3u32));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-60i64..60, 1i64..40).prop_map(|(n, d)| q(n, d))
    }

    fn arb_nonneg() -> impl Strategy<Value = Rational> {
        (0i64..80, 1i64..40).prop_map(|(n, d)| q(n, d))
    }

    fn arb_root() -> impl Strategy<Value = SignedRoot> {
        (any::<bool>(), arb_nonneg()).prop_map(|(neg, v)| {
            let sign = if neg { Sign::Minus } else { Sign::Plus };
            SignedRoot::of(sign, &v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn square_of_root_is_exact(neg in any::<bool>(), v in arb_nonneg()) {
            let sign = if neg { Sign::Minus } else { Sign::Plus };
            let r = SignedRoot::of(sign, &v).unwrap();
            prop_assert_eq!(r.square(), v.clone());
            if !v.is_zero() {
                prop_assert_eq!(r.sign(), sign);
            }
        }

        #[test]
        fn mul_commutes_and_associates(a in arb_root(), b in arb_root(), c in arb_root()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!((&a * &b).square(), a.square() * b.square());
        }

        #[test]
        fn canonicalization_is_idempotent(a in arb_root()) {
            let again = SignedRoot::new(a.coefficient().clone(), a.radicand().clone());
            prop_assert_eq!(&again, &a);
            prop_assert_eq!(SignedRoot::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn rational_render_round_trip(r in arb_rational()) {
            prop_assert_eq!(Rational::parse(&r.to_string()).unwrap(), r);
        }

        #[test]
        fn zero_test_agrees_with_float(
            parts in proptest::collection::vec((arb_root(), arb_root()), 1..6),
            cancel in any::<bool>(),
        ) {
            let mut sum = RadicalSum::new();
            for (a, b) in &parts {
                sum.add_term(&(a * b));
                if cancel {
                    sum.add_term(&-(a * b));
                }
            }
            prop_assert_eq!(sum.is_zero(), sum.to_f64().abs() < 1e-9);
        }
    }
}

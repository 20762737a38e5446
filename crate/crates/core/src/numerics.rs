//! Scalar backends and fixed-dimension opinion vectors.
//!
//! Two backends implement [`Scalar`]: [`Rational`] (arbitrary precision,
//! always in canonical form) and `f64`. Every simulation is generic over a
//! single backend, so exact and float values can never meet in one
//! arithmetic expression.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number backed by arbitrary-precision integers.
pub type Rational = BigRational;

/// Backend tag carried by every scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Parse(format!("unknown backend `{other}` (expected exact|float)"))),
        }
    }
}

/// Arithmetic required by the dynamics. Implemented by [`Rational`] and `f64`.
pub trait Scalar:
    Signed
    + Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;
    /// Converts an exact rational. The float backend rounds to nearest.
    fn from_rational(r: &Rational) -> Self;
    fn to_float(&self) -> f64;

    /// Exact value, if this backend has one.
    fn to_rational(&self) -> Option<Rational>;

    /// Text form used in CSV and JSON: `p/q` (or `p`) for rationals,
    /// shortest round-trip decimal for floats.
    fn to_text(&self) -> String;

    fn parse_text(s: &str) -> Result<Self>;

    /// Feeds a canonical representation into `state`. Used for exact
    /// state hashing; the float backend hashes raw bits.
    fn hash_canonical<H: std::hash::Hasher>(&self, state: &mut H);

    /// Picks this backend's copy of a precomputed constant.
    fn select(c: &Constant) -> &Self;

    fn div_int(&self, k: usize) -> Self {
        self.clone() / Self::from_i64(k as i64)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_float(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators by scaling.
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn to_text(&self) -> String {
        self.to_string()
    }
    fn parse_text(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn hash_canonical<H: std::hash::Hasher>(&self, state: &mut H) {
        self.numer().hash(state);
        self.denom().hash(state);
    }
    fn select(c: &Constant) -> &Self {
        &c.exact
    }
    fn div_int(&self, k: usize) -> Self {
        self / BigInt::from(k)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_float(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<Rational> {
        None
    }
    fn to_text(&self) -> String {
        format!("{self:?}")
    }
    fn parse_text(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            let q: f64 = q.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            if q == 0.0 {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            return Ok(p / q);
        }
        s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
    }
    fn hash_canonical<H: std::hash::Hasher>(&self, state: &mut H) {
        // +0.0 and -0.0 compare equal
        let v = if *self == 0.0 { 0.0f64 } else { *self };
        v.to_bits().hash(state);
    }
    fn select(c: &Constant) -> &Self {
        &c.float
    }
}

/// A rational constant with its float image cached, so hot membership
/// tests never convert big rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    exact: Rational,
    float: f64,
}

impl Constant {
    pub fn new(exact: Rational) -> Self {
        let float = <f64 as Scalar>::from_rational(&exact);
        Constant { exact, float }
    }

    /// A constant whose float image is not the rounding of the exact value
    /// (e.g. `R^p` for a fractional `p`, which only the float backend uses).
    pub fn with_float(exact: Rational, float: f64) -> Self {
        Constant { exact, float }
    }

    pub fn exact(&self) -> &Rational {
        &self.exact
    }

    pub fn float(&self) -> f64 {
        self.float
    }
}

/// Parses `p`, `p/q`, or a finite decimal (`-0.125`, `1e-3`) into an exact
/// rational without passing through binary floating point.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational literal `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if Zero::is_zero(&q) {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() { BigInt::zero() } else { all_digits.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// An opinion vector: `d ≥ 1` coordinates of one backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Opinion<S> {
    coords: Box<[S]>,
}

impl<S: Scalar> Opinion<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension("opinion vectors need at least one coordinate".into()));
        }
        Ok(Opinion { coords: coords.into_boxed_slice() })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(vec![S::zero(); d])
    }

    pub fn from_i64s(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| S::from_i64(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn get(&self, k: usize) -> &S {
        &self.coords[k]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a.clone() - b.clone()))
    }

    pub fn neg(&self) -> Self {
        Opinion { coords: self.coords.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, factor: &S) -> Self {
        Opinion { coords: self.coords.iter().map(|c| c.clone() * factor.clone()).collect() }
    }

    /// Divides every coordinate by a positive integer.
    pub fn scale_div(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("division by zero agent count".into()));
        }
        Ok(Opinion { coords: self.coords.iter().map(|c| c.div_int(k)).collect() })
    }

    pub fn norm2_sq(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, c| acc + c.clone() * c.clone())
    }

    pub fn norm_inf(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, c| S::max_of(acc, c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| x.is_zero())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(S::to_float).collect()
    }

    pub fn hash_canonical<H: std::hash::Hasher>(&self, state: &mut H) {
        for c in self.coords.iter() {
            c.hash_canonical(state);
        }
    }

    fn zip_map(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Opinion { coords: self.coords.iter().zip(other.coords.iter()).map(|(a, b)| f(a, b)).collect() }
    }
}

impl<S: Scalar> fmt::Display for Opinion<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, c) in self.coords.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&c.to_text())?;
        }
        f.write_str(")")
    }
}

/// Shorthand for building exact rationals in tests and scenario code.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(v: &[(i64, i64)]) -> Opinion<Rational> {
        Opinion::new(v.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn add_examples() {
        let a = Opinion::<Rational>::from_i64s(&[1, 2]).unwrap();
        let b = Opinion::<Rational>::from_i64s(&[3, 4]).unwrap();
        assert_eq!(a.add(&b).unwrap(), Opinion::from_i64s(&[4, 6]).unwrap());

        let zero = Opinion::<Rational>::zeros(2).unwrap();
        assert_eq!(zero.add(&a).unwrap(), a);

        let sum = exact(&[(1, 2), (1, 3)]).add(&exact(&[(1, 2), (2, 3)])).unwrap();
        assert_eq!(sum, Opinion::from_i64s(&[1, 1]).unwrap());
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        let a = Opinion::<f64>::from_i64s(&[1, 2]).unwrap();
        let b = Opinion::<f64>::from_i64s(&[1]).unwrap();
        assert!(matches!(a.add(&b), Err(Error::Dimension(_))));
        assert!(matches!(Opinion::<f64>::new(vec![]), Err(Error::Dimension(_))));
    }

    #[test]
    fn scale_div_examples() {
        let six = Opinion::<Rational>::from_i64s(&[0]).unwrap().add(&Opinion::from_i64s(&[6]).unwrap()).unwrap();
        assert_eq!(six.scale_div(2).unwrap(), Opinion::from_i64s(&[3]).unwrap());
        let ten = Opinion::<Rational>::from_i64s(&[3]).unwrap().add(&Opinion::from_i64s(&[7]).unwrap()).unwrap();
        assert_eq!(ten.scale_div(2).unwrap(), Opinion::from_i64s(&[5]).unwrap());
        let v = exact(&[(2, 7), (-5, 3)]);
        assert_eq!(v.scale_div(1).unwrap(), v);
        assert!(matches!(v.scale_div(0), Err(Error::Domain(_))));
    }

    #[test]
    fn norm2_sq_examples() {
        assert_eq!(Opinion::<Rational>::from_i64s(&[3, 4]).unwrap().norm2_sq(), rat(25, 1));
        assert_eq!(Opinion::<Rational>::zeros(2).unwrap().norm2_sq(), rat(0, 1));
        assert_eq!(exact(&[(1, 2), (1, 2)]).norm2_sq(), rat(1, 2));
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-6").unwrap(), rat(-6, 1));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-1.25e-2").unwrap(), rat(-1, 80));
        assert_eq!(parse_rational("2/0.5").unwrap(), rat(4, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        for bad in ["", "abc", "1/0", "1.2.3", "-", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn text_forms() {
        assert_eq!(rat(6, 2).to_text(), "3");
        assert_eq!(rat(-1, 3).to_text(), "-1/3");
        assert_eq!(<Rational as Scalar>::parse_text("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(<f64 as Scalar>::parse_text("1/4").unwrap(), 0.25);
        assert_eq!(0.1f64.to_text(), "0.1");
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1_000_000i64..=1_000_000, 1i64..=1_000_000).prop_map(|(p, q)| rat(p, q))
    }

    proptest! {
        #[test]
        fn exact_arithmetic_is_canonical(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            let left = (a.clone() + b.clone()) + c.clone();
            let right = a.clone() + (c.clone() + b.clone());
            prop_assert_eq!(left.numer(), right.numer());
            prop_assert_eq!(left.denom(), right.denom());
            prop_assert!(left.denom() > &BigInt::zero());
            prop_assert!(num_integer::Integer::gcd(left.numer(), left.denom()) == BigInt::from(1) || Zero::is_zero(left.numer()));
            prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a * (b * c));
        }

        #[test]
        fn midpoint_is_order_independent(a in arb_rational(), b in arb_rational()) {
            let va = Opinion::new(vec![a.clone()]).unwrap();
            let vb = Opinion::new(vec![b.clone()]).unwrap();
            let m1 = va.add(&vb).unwrap().scale_div(2).unwrap();
            let m2 = vb.add(&va).unwrap().scale_div(2).unwrap();
            let m3 = Opinion::new(vec![a.div_int(2) + b.div_int(2)]).unwrap();
            prop_assert_eq!(&m1, &m2);
            prop_assert_eq!(&m1, &m3);
        }

        #[test]
        fn float_tracks_exact(a in arb_rational(), b in arb_rational(), k in 1usize..50) {
            let exact = (a.clone() + b.clone()).div_int(k) * a.clone();
            let fa = a.to_float();
            let fb = b.to_float();
            let float = (fa + fb).div_int(k) * fa;
            let reference = exact.to_float();
            prop_assert!((float - reference).abs() <= 1e-12 * reference.abs() + 1e-300);
        }
    }
}

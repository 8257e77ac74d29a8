//! Scalar domains: exact rationals and IEEE doubles.
//!
//! Every matrix routine is generic over [`Scalar`]. The rational domain is
//! exact and ignores tolerances; the float domain compares against an
//! absolute threshold supplied by the caller.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Complex double used for eigenvalues of real matrices.
pub type ComplexF = num_complex::Complex64;

/// Which scalar domain a matrix lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Rational,
    Float,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Rational => f.write_str("rational"),
            Domain::Float => f.write_str("float"),
        }
    }
}

/// Field operations plus the handful of comparisons elimination needs.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const DOMAIN: Domain;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> f64;

    /// Exact zero test for rationals; `|x| <= tol` for floats.
    fn negligible(&self, tol: f64) -> bool;

    /// Compares absolute values, exactly where the domain allows it.
    fn cmp_abs(&self, other: &Self) -> Ordering;

    /// Exact for rationals, nearest double for floats.
    fn from_rational(q: &Rational) -> Self;

    /// The exact binary value of a finite double.
    fn from_f64(x: f64) -> Option<Self>;

    /// Parses one matrix-file token into this domain.
    fn parse_token(token: &str) -> Result<Self, Error>;

    fn is_finite(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        self.negligible(0.0)
    }
}

/// Exact rational number with an arbitrary-precision numerator and
/// denominator, always kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::Parse(format!("zero denominator in {numer}/{denom}")));
        }
        Ok(Rational(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
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

/// Parses `"p"` or `"p/q"` with optional sign and surrounding whitespace.
/// Decimal and exponent notation is refused so float data never enters the
/// exact domain silently.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || Error::Parse(format!("not a rational token: {s:?} (expected \"p\" or \"p/q\")"));
        if t.is_empty() {
            return Err(bad());
        }
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let is_int = |x: &str| {
            let digits = x.strip_prefix(['-', '+']).unwrap_or(x);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !is_int(n) || !is_int(d) {
            return Err(bad());
        }
        let n: BigInt = n.trim_start_matches('+').parse().map_err(|_| bad())?;
        let d: BigInt = d.trim_start_matches('+').parse().map_err(|_| bad())?;
        Rational::from_big(n, d)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Token {
            Str(String),
            Int(i64),
        }
        match Token::deserialize(d)? {
            Token::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Token::Int(i) => Ok(Rational::from_integer(i)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl $atr for Rational {
            fn $am(&mut self, rhs: Rational) {
                self.0.$am(rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.0.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.0.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

impl Scalar for Rational {
    const DOMAIN: Domain = Domain::Rational;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn negligible(&self, _tol: f64) -> bool {
        self.0.is_zero()
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.0.abs().cmp(&other.0.abs())
    }
    fn parse_token(token: &str) -> Result<Self, Error> {
        token.parse()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }
}

impl Scalar for f64 {
    const DOMAIN: Domain = Domain::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.abs().total_cmp(&other.abs())
    }
    fn parse_token(token: &str) -> Result<Self, Error> {
        let t = token.trim();
        if let Ok(v) = t.parse::<f64>() {
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("non-finite float token {token:?}")))
            };
        }
        t.parse::<Rational>()
            .map(|q| q.to_f64())
            .map_err(|_| Error::Parse(format!("not a number: {token:?}")))
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64()
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_canonicalizes() {
        assert_eq!(r("6/-4").to_string(), "-3/2");
        assert_eq!(r(" -3/4 ").to_string(), "-3/4");
        assert_eq!(r("0/7").to_string(), "0");
        assert_eq!(r("0/7").denom(), &BigInt::from(1));
        assert_eq!(r("+5").to_string(), "5");
    }

    #[test]
    fn rejects_malformed_tokens() {
        for bad in ["", "1/0", "0.5", "1e3", "a", "1/", "/2", "--1", "1/2/3"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn big_intermediates_stay_exact() {
        let mut x = Rational::from_integer(1);
        for _ in 0..40 {
            x *= r("1000000007/3");
        }
        for _ in 0..40 {
            x = x / r("1000000007/3");
        }
        assert_eq!(x, Rational::from_integer(1));
    }

    #[test]
    fn serde_accepts_strings_and_ints() {
        let v: Vec<Rational> = serde_json::from_str(r#"["2/3", 4, "-1"]"#).unwrap();
        assert_eq!(v, vec![r("2/3"), r("4"), r("-1")]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["2/3","4","-1"]"#);
        assert!(serde_json::from_str::<Vec<Rational>>("[0.5]").is_err());
    }

    #[test]
    fn float_negligible_uses_tolerance() {
        assert!(1e-13_f64.negligible(1e-12));
        assert!(!1e-11_f64.negligible(1e-12));
        assert_eq!(2.0_f64.cmp_abs(&-3.0), Ordering::Less);
    }
}

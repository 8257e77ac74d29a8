//! Univariate polynomials with exact rational coefficients.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{ComplexF, Rational, Scalar};

/// Coefficients lowest degree first; no trailing zeros, so the zero
/// polynomial has no coefficients at all.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::from_integer(1))
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    /// `x - root`.
    pub fn linear(root: Rational) -> Self {
        Polynomial::new(vec![-root, Rational::from_integer(1)])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Rational::from_integer(0); k + 1];
        coeffs[k] = Rational::from_integer(1);
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(Rational::is_one)
    }

    /// Divides through by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Polynomial::zero(),
            Some(lc) => {
                let inv = lc.recip();
                Polynomial { coeffs: self.coeffs.iter().map(|c| c * &inv).collect() }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::from_integer(0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Long division: `self = divisor * quotient + remainder`, `deg(remainder) < deg(divisor)`.
    pub fn divmod(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let dd = divisor.degree().ok_or(Error::ZeroPolynomialDivisor)?;
        let lead_inv = divisor.coeffs[dd].recip();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&nd| nd >= dd) else {
            return Ok((Polynomial::zero(), self.clone()));
        };
        let mut quot = vec![Rational::from_integer(0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    pub fn divides(&self, other: &Polynomial) -> Result<bool> {
        Ok(other.divmod(self)?.1.is_zero())
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::BothPolynomialsZero);
        }
        let (mut a, mut b) = (self.monic(), other.monic());
        while !b.is_zero() {
            let (_, r) = a.divmod(&b)?;
            a = b;
            b = r.monic();
        }
        Ok(a.monic())
    }

    /// Monic least common multiple; zero when either input is zero.
    pub fn lcm(&self, other: &Polynomial) -> Result<Polynomial> {
        let g = self.gcd(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial::zero());
        }
        let (q, _) = self.mul(other).divmod(&g)?;
        Ok(q.monic())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::from_integer(0), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_complex(&self, z: ComplexF) -> ComplexF {
        self.coeffs
            .iter()
            .rev()
            .fold(ComplexF::new(0.0, 0.0), |acc, c| acc * z + ComplexF::new(c.to_f64(), 0.0))
    }

    /// `p(A)` by Horner's rule, using `deg(p)` matrix products.
    pub fn eval_matrix<T: Scalar>(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        let n = a.require_square()?;
        let mut acc = Matrix::<T>::zeros(n, n);
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if k + 1 < self.coeffs.len() {
                acc = acc.matmul(a)?;
            }
            let c = T::from_rational(c);
            if !c.is_zero() {
                for i in 0..n {
                    acc[(i, i)] = acc[(i, i)].clone() + c.clone();
                }
            }
        }
        Ok(acc)
    }

    /// Applies `p(A)` to a vector with matrix-vector products only.
    pub fn apply_to_vector<T: Scalar>(&self, a: &Matrix<T>, v: &[T]) -> Result<Vec<T>> {
        a.require_square()?;
        let mut acc = vec![T::zero(); v.len()];
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if k + 1 < self.coeffs.len() {
                acc = a.mul_vec(&acc)?;
            }
            let c = T::from_rational(c);
            for (x, vi) in acc.iter_mut().zip(v) {
                *x = x.clone() + c.clone() * vi.clone();
            }
        }
        Ok(acc)
    }

    /// All rational roots, via the rational root theorem on the
    /// integer-scaled polynomial. `None` when the candidate search would need
    /// to factor integers beyond 2^53.
    pub fn rational_roots(&self) -> Option<Vec<Rational>> {
        let deg = self.degree()?;
        if deg == 0 {
            return Some(Vec::new());
        }
        let denom_lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> =
            self.coeffs.iter().map(|c| c.numer() * (&denom_lcm / c.denom())).collect();
        let mut roots = Vec::new();
        let low = ints.iter().position(|c| !c.is_zero())?;
        if low > 0 {
            roots.push(Rational::from_integer(0));
        }
        let trimmed = &ints[low..];
        if trimmed.len() == 1 {
            return Some(roots);
        }
        let a0 = trimmed[0].abs().to_u64().filter(|&v| v < 1 << 53)?;
        let an = trimmed[trimmed.len() - 1].abs().to_u64().filter(|&v| v < 1 << 53)?;
        let mut seen = std::collections::BTreeSet::new();
        for p in divisors(a0) {
            for q in divisors(an) {
                for sign in [1i64, -1] {
                    let cand = Rational::from_big(BigInt::from(p) * sign, BigInt::from(q)).ok()?;
                    if seen.insert(cand.clone()) && self.eval(&cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.inner().is_negative();
            let mag = c.abs();
            match (first, negative) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            let coef = if mag.is_integer() { mag.to_string() } else { format!("({mag})") };
            match k {
                0 => f.write_str(&mag.to_string())?,
                _ => {
                    if !mag.is_one() {
                        f.write_str(&coef)?;
                    }
                    f.write_str("x")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

/// Parses the output format of `Display`, e.g. `x^2 - 5x + 6` or `(1/2)x - 3/4`.
impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("polynomial {s:?}: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        // Split into signed terms at top-level +/- (never inside parentheses).
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, ch) in compact.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start => {
                    terms.push(&compact[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&compact[start..]);

        let mut coeffs: Vec<Rational> = Vec::new();
        for term in terms {
            let (negative, body) = match term.as_bytes().first() {
                Some(b'-') => (true, &term[1..]),
                Some(b'+') => (false, &term[1..]),
                _ => (false, term),
            };
            let (coef_text, power) = match body.find('x') {
                None => (body, 0usize),
                Some(ix) => {
                    let rest = &body[ix + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|p| p.parse().ok())
                            .ok_or_else(|| bad("bad exponent"))?
                    };
                    (&body[..ix], power)
                }
            };
            let coef_text = coef_text.trim_start_matches('(').trim_end_matches(')');
            let mut coef: Rational = if coef_text.is_empty() {
                if power == 0 {
                    return Err(bad("empty term"));
                }
                Rational::from_integer(1)
            } else {
                coef_text.parse().map_err(|_| bad("bad coefficient"))?
            };
            if negative {
                coef = -coef;
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Rational::from_integer(0));
            }
            coeffs[power] += coef;
        }
        Ok(Polynomial::new(coeffs))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64(c)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(p(&[-1, 1]).mul(&p(&[-2, 1])), p(&[2, -3, 1]));
        assert_eq!(p(&[3, 0, 1]).add(&Polynomial::zero()), p(&[3, 0, 1]));
        let (q, r) = p(&[6, -5, 1]).divmod(&p(&[-2, 1])).unwrap();
        assert_eq!(q, p(&[-3, 1]));
        assert!(r.is_zero());
        assert_eq!(p(&[-2, 1]).mul(&q).add(&r), p(&[6, -5, 1]));
        assert_eq!(p(&[1]).divmod(&Polynomial::zero()), Err(Error::ZeroPolynomialDivisor));
    }

    #[test]
    fn divmod_by_higher_degree() {
        let (q, r) = p(&[1, 1]).divmod(&p(&[0, 0, 1])).unwrap();
        assert!(q.is_zero());
        assert_eq!(r, p(&[1, 1]));
    }

    #[test]
    fn gcd_lcm_examples() {
        assert_eq!(p(&[0, 0, 1]).gcd(&p(&[0, 1])).unwrap(), p(&[0, 1]));
        assert_eq!(p(&[-1, 1]).gcd(&p(&[-2, 1])).unwrap(), Polynomial::one());
        let a = p(&[0, -1, 1]); // x(x-1)
        let b = p(&[2, -3, 1]); // (x-1)(x-2)
        let l = a.lcm(&b).unwrap();
        assert_eq!(l, p(&[0, 1]).mul(&p(&[-1, 1])).mul(&p(&[-2, 1])));
        assert!(a.divides(&l).unwrap() && b.divides(&l).unwrap());
        assert_eq!(Polynomial::zero().gcd(&Polynomial::zero()), Err(Error::BothPolynomialsZero));
        assert_eq!(Polynomial::zero().gcd(&p(&[4, 2])).unwrap(), p(&[2, 1]));
    }

    #[test]
    fn general_arithmetic_keeps_leading_coefficient() {
        assert_eq!(p(&[0, 3]).mul(&p(&[1, 2])).leading(), Some(&Rational::from_integer(6)));
    }

    #[test]
    fn horner_on_matrices() {
        let id = Matrix::<Rational>::identity(3);
        assert!(p(&[-1, 1]).eval_matrix(&id).unwrap().is_zero_matrix());
        let nil = Matrix::from_i64_rows(&[&[0, 1], &[0, 0]]).unwrap();
        assert!(p(&[0, 0, 1]).eval_matrix(&nil).unwrap().is_zero_matrix());
        let d = Matrix::from_i64_rows(&[&[2, 0], &[0, 3]]).unwrap();
        assert!(p(&[6, -5, 1]).eval_matrix(&d).unwrap().is_zero_matrix());
        assert!(p(&[1]).eval_matrix(&Matrix::from_i64_rows(&[&[1, 2]]).unwrap()).is_err());
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(p(&[6, -5, 1]).to_string(), "x^2 - 5x + 6");
        assert_eq!(p(&[-1, 1]).to_string(), "x - 1");
        assert_eq!(p(&[0, 0, -1]).to_string(), "-x^2");
        assert_eq!(Polynomial::zero().to_string(), "0");
        let half = Polynomial::new(vec!["-3/4".parse().unwrap(), "1/2".parse().unwrap()]);
        assert_eq!(half.to_string(), "(1/2)x - 3/4");
        for poly in [p(&[6, -5, 1]), half, p(&[0, 0, -1]), Polynomial::zero(), p(&[7])] {
            assert_eq!(poly.to_string().parse::<Polynomial>().unwrap(), poly);
        }
        assert!("x^".parse::<Polynomial>().is_err());
        assert!("".parse::<Polynomial>().is_err());
    }

    #[test]
    fn rational_roots_found() {
        let poly = p(&[-2, 1]).mul(&Polynomial::linear("1/3".parse().unwrap())).mul(&p(&[0, 1]));
        let roots = poly.rational_roots().unwrap();
        assert_eq!(roots, vec![Rational::from_integer(0), "1/3".parse().unwrap(), Rational::from_integer(2)]);
        assert!(p(&[1, 0, 1]).rational_roots().unwrap().is_empty());
    }
}

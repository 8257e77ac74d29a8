use serde::{Deserialize, Serialize};

use crate::echelon::{ref_form, solve, PivotStrategy, Solution};
use crate::error::{Error, Result};
use crate::matrix::{unit_vector, Matrix, Vector};
use crate::poly::Polynomial;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovResult {
    /// `b, Ab, ..., A^d b`.
    pub iterates: Vec<Vector<Rational>>,
    /// `c_0..c_d` with `Σ c_i A^i b = 0` and `c_d = 1`.
    pub dependency: Vec<Rational>,
    pub annihilator: Polynomial,
}

impl KrylovResult {
    pub fn degree(&self) -> usize {
        self.dependency.len() - 1
    }
}

/// Iterates `b, Ab, A²b, ...` until the first iterate that depends on the
/// ones before it.
pub fn krylov_annihilator(a: &Matrix<Rational>, b: &[Rational]) -> Result<KrylovResult> {
    let n = a.require_square()?;
    if b.len() != n {
        return Err(Error::ShapeMismatch(format!("vector of length {} for a {n}x{n} matrix", b.len())));
    }
    if b.iter().all(Rational::is_zero) {
        return Err(Error::ZeroVector);
    }
    let mut iterates = vec![b.to_vec()];
    loop {
        let next = a.mul_vec(iterates.last().expect("nonempty"))?;
        iterates.push(next);
        let k = Matrix::from_columns(&iterates)?;
        let res = ref_form(&k, PivotStrategy::FirstNonzero);
        if res.free_cols.is_empty() {
            continue;
        }
        // Only the newest column can be free: the earlier ones were independent.
        let d = iterates.len() - 1;
        debug_assert_eq!(res.free_cols, vec![d]);
        let head = Matrix::from_columns(&iterates[..d])?;
        let c = match solve(&head, &iterates[d])? {
            Solution::Unique { x } => x,
            other => unreachable!("independent head columns give a unique solution, got {other:?}"),
        };
        let mut dependency: Vec<Rational> = c.iter().map(|ci| -ci.clone()).collect();
        dependency.push(Rational::one());
        let annihilator = Polynomial::new(dependency.clone());
        return Ok(KrylovResult { iterates, dependency, annihilator });
    }
}

/// Monic generator of the annihilating ideal of `A`: the lcm of the
/// annihilators of the standard basis vectors.
pub fn minimal_polynomial(a: &Matrix<Rational>) -> Result<Polynomial> {
    let n = a.require_square()?;
    let mut p = Polynomial::one();
    for i in 0..n {
        if p.degree() == Some(n) {
            break;
        }
        let e = unit_vector::<Rational>(n, i);
        if p.apply_to_vector(a, &e)?.iter().all(Rational::is_zero) {
            continue;
        }
        let ann = krylov_annihilator(a, &e)?.annihilator;
        p = p.lcm(&ann)?;
    }
    Ok(p)
}

/// Evidence that a polynomial is the minimal polynomial of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinpolyCertificate {
    pub minpoly: Polynomial,
    /// `p(A)` is exactly zero.
    pub annihilates: bool,
    /// Rational roots `r` for which `p / (x - r)` was tried.
    pub roots_checked: Vec<Rational>,
    /// None of those proper divisors annihilates `A`.
    pub no_smaller_divisor: bool,
}

pub fn minimal_polynomial_certified(a: &Matrix<Rational>) -> Result<MinpolyCertificate> {
    let minpoly = minimal_polynomial(a)?;
    let annihilates = minpoly.eval_matrix(a)?.is_zero_matrix();
    let mut roots = minpoly.rational_roots().unwrap_or_default();
    roots.dedup();
    let mut no_smaller_divisor = true;
    for r in &roots {
        let (q, rem) = minpoly.divmod(&Polynomial::linear(r.clone()))?;
        debug_assert!(rem.is_zero());
        if q.eval_matrix(a)?.is_zero_matrix() {
            no_smaller_divisor = false;
        }
    }
    Ok(MinpolyCertificate { minpoly, annihilates, roots_checked: roots, no_smaller_divisor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::invert;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows).unwrap()
    }

    fn v(x: &[i64]) -> Vec<Rational> {
        x.iter().map(|&k| Rational::from_integer(k)).collect()
    }

    #[test]
    fn annihilator_examples() {
        let k = krylov_annihilator(&Matrix::identity(3), &v(&[1, 0, 0])).unwrap();
        assert_eq!(k.annihilator, Polynomial::from_i64(&[-1, 1]));
        assert_eq!(k.degree(), 1);

        let k = krylov_annihilator(&q(&[&[0, 1], &[0, 0]]), &v(&[0, 1])).unwrap();
        assert_eq!(k.iterates, vec![v(&[0, 1]), v(&[1, 0]), v(&[0, 0])]);
        assert_eq!(k.annihilator, Polynomial::monomial(2));

        let a = q(&[&[2, 0], &[0, 3]]);
        let k = krylov_annihilator(&a, &v(&[1, 1])).unwrap();
        assert_eq!(k.annihilator, Polynomial::from_i64(&[6, -5, 1]));
        assert!(k.annihilator.apply_to_vector(&a, &v(&[1, 1])).unwrap().iter().all(Rational::is_zero));

        assert_eq!(krylov_annihilator(&a, &v(&[0, 0])).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn minpoly_examples() {
        assert_eq!(minimal_polynomial(&Matrix::identity(4)).unwrap(), Polynomial::from_i64(&[-1, 1]));
        assert_eq!(minimal_polynomial(&q(&[&[0, 1], &[0, 0]])).unwrap(), Polynomial::monomial(2));
        let a = q(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        let p = minimal_polynomial(&a).unwrap();
        assert_eq!(p, Polynomial::from_i64(&[6, -5, 1]));
        assert!(p.eval_matrix(&a).unwrap().is_zero_matrix());
        assert!(minimal_polynomial(&Matrix::<Rational>::zeros(2, 2)).unwrap() == Polynomial::monomial(1));
    }

    #[test]
    fn minpoly_certificate() {
        let cert = minimal_polynomial_certified(&q(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 3]])).unwrap();
        assert!(cert.annihilates && cert.no_smaller_divisor);
        assert_eq!(cert.roots_checked.len(), 2);
        let cert = minimal_polynomial_certified(&q(&[&[0, -1], &[1, 0]])).unwrap();
        assert_eq!(cert.minpoly, Polynomial::from_i64(&[1, 0, 1]));
        assert!(cert.annihilates && cert.roots_checked.is_empty());
    }

    #[test]
    fn minpoly_similarity_invariant() {
        let a = q(&[&[1, 2, 0], &[0, 1, 0], &[0, 0, 1]]);
        let u = q(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 2]]);
        let b = invert(&u).unwrap().matmul(&a).unwrap().matmul(&u).unwrap();
        assert_eq!(minimal_polynomial(&a).unwrap(), minimal_polynomial(&b).unwrap());
        assert_eq!(minimal_polynomial(&a).unwrap(), Polynomial::from_i64(&[1, -2, 1]));
    }
}

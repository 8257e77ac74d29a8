//! Inversion by Gauss–Jordan and changes of basis.

use serde::{Deserialize, Serialize};

use crate::echelon::{is_independent, rref_with, solve, EchelonOptions, Solution, StepTrace};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Scalar;

/// n independent vectors in n-space, kept alongside the matrix having them
/// as columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct BasisSet<T> {
    vectors: Vec<Vector<T>>,
    #[serde(skip)]
    as_matrix: Matrix<T>,
}

impl<T: Scalar> BasisSet<T> {
    pub fn new(vectors: Vec<Vector<T>>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::NotABasis("no vectors".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::NotABasis(format!("{n} vectors of length {} cannot be a basis", v.len())));
        }
        let check = is_independent(&vectors)?;
        if let Some(dep) = check.dependency {
            return Err(Error::NotABasis(format!(
                "vector {} is a combination of the ones before it (rank {})",
                dep.index, check.rank
            )));
        }
        let as_matrix = Matrix::from_columns(&vectors)?;
        Ok(BasisSet { vectors, as_matrix })
    }

    pub fn from_matrix(u: &Matrix<T>) -> Result<Self> {
        BasisSet::new(u.columns())
    }

    pub fn standard(n: usize) -> Self {
        BasisSet::from_matrix(&Matrix::identity(n)).expect("identity columns are a basis")
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.as_matrix
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Inverse<T> {
    pub inverse: Matrix<T>,
    /// Row operations on the augmented block `[A | I]`.
    pub trace: StepTrace<T>,
}

pub fn invert<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(invert_traced(a, &EchelonOptions::default_for::<T>())?.inverse)
}

/// Reduces `[A | I]` to `[I | A⁻¹]`.
pub fn invert_traced<T: Scalar>(a: &Matrix<T>, opts: &EchelonOptions) -> Result<Inverse<T>> {
    let n = a.require_square()?;
    let aug = a.hstack(&Matrix::identity(n))?;
    let res = rref_with(&aug, opts);
    let left_pivots = res.pivots.iter().filter(|&&(_, c)| c < n).count();
    if left_pivots < n {
        let free_cols = res.free_cols.iter().copied().filter(|&c| c < n).collect();
        return Err(Error::Singular { rank: left_pivots, free_cols });
    }
    let inverse = res.reduced().column_block(n..2 * n)?;
    Ok(Inverse { inverse, trace: res.trace })
}

/// `c` with `U c = v`.
pub fn coordinates_in_basis<T: Scalar>(v: &[T], basis: &BasisSet<T>) -> Result<Vector<T>> {
    match solve(basis.as_matrix(), v)? {
        Solution::Unique { x } => Ok(x),
        other => unreachable!("a basis matrix is nonsingular, got {other:?}"),
    }
}

/// `A_U = U⁻¹ A_E U`, the matrix of the same map in the coordinates of `U`.
pub fn change_of_basis<T: Scalar>(a_e: &Matrix<T>, basis: &BasisSet<T>) -> Result<Matrix<T>> {
    let n = a_e.require_square()?;
    if n != basis.dim() {
        return Err(Error::ShapeMismatch(format!("{n}x{n} matrix with a basis of {}", basis.dim())));
    }
    let u = basis.as_matrix();
    invert(u)?.matmul(a_e)?.matmul(u)
}

/// Largest off-diagonal magnitude.
pub fn off_diagonal<T: Scalar>(m: &Matrix<T>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                worst = worst.max(m[(i, j)].magnitude());
            }
        }
    }
    worst
}

/// Representation of `A` in a basis claimed to consist of eigenvectors.
/// Must come out diagonal: exactly for rationals, within `1e-9 ‖A‖_F` for
/// floats.
pub fn eigenbasis_representation<T: Scalar>(a: &Matrix<T>, eigvecs: &BasisSet<T>) -> Result<Matrix<T>> {
    let a_u = change_of_basis(a, eigvecs)?;
    let exact_zero = (0..a_u.rows())
        .all(|i| (0..a_u.cols()).all(|j| i == j || a_u[(i, j)].is_zero()));
    let residual = off_diagonal(&a_u);
    let diagonal = exact_zero || (T::DOMAIN == crate::scalar::Domain::Float && residual <= 1e-9 * a.norm_fro());
    if !diagonal {
        return Err(Error::NotDiagonal { residual });
    }
    Ok(a_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows).unwrap()
    }

    fn v(x: &[i64]) -> Vec<Rational> {
        x.iter().map(|&k| Rational::from_integer(k)).collect()
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&Matrix::<Rational>::identity(3)).unwrap(), Matrix::identity(3));
        let a = q(&[&[1, 2], &[3, 4]]);
        let inv = invert(&a).unwrap();
        let expected = Matrix::from_rows(vec![
            vec![Rational::from_integer(-2), Rational::from_integer(1)],
            vec![Rational::new(3, 2).unwrap(), Rational::new(-1, 2).unwrap()],
        ])
        .unwrap();
        assert_eq!(inv, expected);
        assert_eq!(a.matmul(&inv).unwrap(), Matrix::identity(2));
        assert_eq!(inv.matmul(&a).unwrap(), Matrix::identity(2));
        assert_eq!(
            invert(&q(&[&[1, 2], &[2, 4]])).unwrap_err(),
            Error::Singular { rank: 1, free_cols: vec![1] }
        );
        assert!(matches!(invert(&q(&[&[1, 2]])), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn float_inverse_within_tolerance() {
        let a = Matrix::new(3, 3, vec![4.0, -2.0, 1.0, 3.0, 6.0, -4.0, 2.0, 1.0, 8.0]).unwrap();
        let inv = invert(&a).unwrap();
        let err = a.matmul(&inv).unwrap().max_abs_diff(&Matrix::identity(3));
        assert!(err <= 1e-10 * a.norm_fro());
        let traced = invert_traced(&a, &EchelonOptions::default()).unwrap();
        assert!(!traced.trace.is_empty());
    }

    #[test]
    fn coordinates_examples() {
        let std = BasisSet::<Rational>::standard(2);
        assert_eq!(coordinates_in_basis(&v(&[4, 5]), &std).unwrap(), v(&[4, 5]));
        let u = BasisSet::new(vec![v(&[1, 1]), v(&[1, -1])]).unwrap();
        let c = coordinates_in_basis(&v(&[3, 3]), &u).unwrap();
        assert_eq!(c, v(&[3, 0]));
        assert_eq!(u.as_matrix().mul_vec(&c).unwrap(), v(&[3, 3]));
        assert_eq!(coordinates_in_basis(&v(&[0, 0]), &u).unwrap(), v(&[0, 0]));
    }

    #[test]
    fn basis_set_rejects_non_bases() {
        assert!(BasisSet::new(vec![v(&[1, 1]), v(&[2, 2])]).is_err());
        assert!(BasisSet::new(vec![v(&[1, 0, 0]), v(&[0, 1, 0])]).is_err());
        assert!(BasisSet::<Rational>::new(vec![]).is_err());
    }

    #[test]
    fn change_of_basis_examples() {
        let a = q(&[&[1, 2], &[3, 4]]);
        assert_eq!(change_of_basis(&a, &BasisSet::standard(2)).unwrap(), a);
        let swap = BasisSet::new(vec![v(&[0, 1]), v(&[1, 0])]).unwrap();
        assert_eq!(change_of_basis(&q(&[&[2, 0], &[0, 3]]), &swap).unwrap(), q(&[&[3, 0], &[0, 2]]));
        let scaled = BasisSet::new(vec![v(&[1, 0]), v(&[0, 2])]).unwrap();
        assert_eq!(change_of_basis(&q(&[&[2, 1], &[0, 2]]), &scaled).unwrap(), q(&[&[2, 2], &[0, 2]]));
    }

    #[test]
    fn eigenbasis_examples() {
        let any = BasisSet::new(vec![v(&[1, 2]), v(&[3, 1])]).unwrap();
        assert_eq!(eigenbasis_representation(&Matrix::identity(2), &any).unwrap(), Matrix::identity(2));
        let eig = BasisSet::new(vec![v(&[1, 1]), v(&[1, -1])]).unwrap();
        assert_eq!(eigenbasis_representation(&q(&[&[2, 1], &[1, 2]]), &eig).unwrap(), q(&[&[3, 0], &[0, 1]]));
        let err = eigenbasis_representation(&q(&[&[0, 1], &[0, 0]]), &BasisSet::standard(2)).unwrap_err();
        assert!(matches!(err, Error::NotDiagonal { residual } if residual == 1.0));
    }
}

use serde::{Deserialize, Serialize};

use super::{rref_with, EchelonOptions, RefResult};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Solution<T> {
    Unique { x: Vector<T> },
    /// Free variables are 0 in `particular`; one basis vector per free column.
    Parametric { particular: Vector<T>, nullspace_basis: Vec<Vector<T>> },
    /// The reduced augmented matrix has a pivot in the right-hand-side
    /// column, in row `witness_row`.
    Inconsistent { witness_row: usize },
}

impl<T> Solution<T> {
    pub fn is_consistent(&self) -> bool {
        !matches!(self, Solution::Inconsistent { .. })
    }

    /// Any solution, if one exists.
    pub fn particular(&self) -> Option<&Vector<T>> {
        match self {
            Solution::Unique { x } => Some(x),
            Solution::Parametric { particular, .. } => Some(particular),
            Solution::Inconsistent { .. } => None,
        }
    }
}

pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Solution<T>> {
    solve_with(a, b, &EchelonOptions::default_for::<T>())
}

/// Reduces `(A | b)` to RREF and reads the solution set off the pivots.
pub fn solve_with<T: Scalar>(a: &Matrix<T>, b: &[T], opts: &EchelonOptions) -> Result<Solution<T>> {
    if b.len() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let n = a.cols();
    let aug = a.hstack(&Matrix::from_columns(&[b.to_vec()])?)?;
    let res = rref_with(&aug, opts);
    if let Some(&(row, _)) = res.pivots.iter().find(|&&(_, c)| c == n) {
        return Ok(Solution::Inconsistent { witness_row: row });
    }
    let reduced = res.reduced();
    let mut x = vec![T::zero(); n];
    for &(r, c) in &res.pivots {
        x[c] = reduced[(r, n)].clone();
    }
    let free: Vec<usize> = res.free_cols.iter().copied().filter(|&c| c < n).collect();
    if free.is_empty() {
        return Ok(Solution::Unique { x });
    }
    Ok(Solution::Parametric { particular: x, nullspace_basis: null_vectors(&res, n, &free) })
}

fn null_vectors<T: Scalar>(res: &RefResult<T>, n: usize, free: &[usize]) -> Vec<Vector<T>> {
    let reduced = res.reduced();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); n];
            v[f] = T::one();
            for &(r, c) in &res.pivots {
                if c < n {
                    v[c] = -reduced[(r, f)].clone();
                }
            }
            v
        })
        .collect()
}

pub fn nullspace_basis<T: Scalar>(a: &Matrix<T>) -> Vec<Vector<T>> {
    nullspace_basis_with(a, &EchelonOptions::default_for::<T>())
}

/// One vector per free column: that variable set to 1, the other free
/// variables 0.
pub fn nullspace_basis_with<T: Scalar>(a: &Matrix<T>, opts: &EchelonOptions) -> Vec<Vector<T>> {
    let res = rref_with(a, opts);
    null_vectors(&res, a.cols(), &res.free_cols)
}

//! Independence, spanning and basis questions, each answered by counting
//! pivots of a column-vector matrix.

use serde::{Deserialize, Serialize};

use super::{ref_form, solve, PivotStrategy, Solution};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Scalar;

fn common_len<T>(sets: &[&[Vector<T>]]) -> Result<Option<usize>> {
    let mut len = None;
    for v in sets.iter().flat_map(|s| s.iter()) {
        match len {
            None => len = Some(v.len()),
            Some(n) if n != v.len() => {
                return Err(Error::ShapeMismatch(format!("vector lengths {n} and {} differ", v.len())))
            }
            _ => {}
        }
    }
    if len == Some(0) {
        return Err(Error::ShapeMismatch("vectors must have at least one entry".into()));
    }
    Ok(len)
}

fn rank_of<T: Scalar>(vectors: &[Vector<T>]) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    Ok(ref_form(&Matrix::from_columns(vectors)?, PivotStrategy::FirstNonzero).rank)
}

/// `vectors[index] = Σ coefficients[i] · vectors[i]` over `i < index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dependency<T> {
    pub index: usize,
    pub coefficients: Vector<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Independence<T> {
    pub independent: bool,
    pub rank: usize,
    pub dependency: Option<Dependency<T>>,
}

/// Independent iff the column matrix has a pivot in every column. Otherwise
/// the first free column lies in the span of the columns before it.
pub fn is_independent<T: Scalar>(vectors: &[Vector<T>]) -> Result<Independence<T>> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("independence of an empty list".into()));
    }
    common_len(&[vectors])?;
    let a = Matrix::from_columns(vectors)?;
    let res = ref_form(&a, PivotStrategy::FirstNonzero);
    let Some(&ell) = res.free_cols.first() else {
        return Ok(Independence { independent: true, rank: res.rank, dependency: None });
    };
    let coefficients = if ell == 0 {
        Vec::new()
    } else {
        let head = a.column_block(0..ell)?;
        match solve(&head, &vectors[ell])? {
            Solution::Unique { x } => x,
            other => unreachable!("columns before the first free column are independent: {other:?}"),
        }
    };
    Ok(Independence {
        independent: false,
        rank: res.rank,
        dependency: Some(Dependency { index: ell, coefficients }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanMembership<T> {
    pub member: bool,
    pub coefficients: Option<Vector<T>>,
}

pub fn in_span<T: Scalar>(v: &[T], spanning: &[Vector<T>]) -> Result<SpanMembership<T>> {
    common_len(&[std::slice::from_ref(&v.to_vec()), spanning])?;
    if spanning.is_empty() {
        let zero = v.iter().all(Scalar::is_zero);
        return Ok(SpanMembership { member: zero, coefficients: zero.then(Vec::new) });
    }
    let a = Matrix::from_columns(spanning)?;
    Ok(match solve(&a, v)? {
        Solution::Inconsistent { .. } => SpanMembership { member: false, coefficients: None },
        sol => SpanMembership { member: true, coefficients: sol.particular().cloned() },
    })
}

/// Same span iff each list lies inside the span of the other.
pub fn span_equals<T: Scalar>(u: &[Vector<T>], w: &[Vector<T>]) -> Result<bool> {
    common_len(&[u, w])?;
    for x in u {
        if !in_span(x, w)?.member {
            return Ok(false);
        }
    }
    for x in w {
        if !in_span(x, u)?.member {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBound<T> {
    pub forced_dependent: bool,
    /// ℓ, the size of the spanning set.
    pub spanning_count: usize,
    /// k = dim of the spanned subspace = pivots of the spanning matrix.
    pub dim: usize,
    /// m, the size of S.
    pub set_size: usize,
    pub dependency: Option<Dependency<T>>,
    pub certificate: String,
}

/// If S lies in the span of ℓ vectors spanning a k-dimensional space, then
/// more than k vectors in S must be dependent.
pub fn independence_size_bound<T: Scalar>(
    spanning: &[Vector<T>],
    s: &[Vector<T>],
) -> Result<SizeBound<T>> {
    common_len(&[spanning, s])?;
    for (index, x) in s.iter().enumerate() {
        if !in_span(x, spanning)?.member {
            return Err(Error::NotInSpan { index });
        }
    }
    let (ell, m) = (spanning.len(), s.len());
    let k = rank_of(spanning)?;
    let forced = m > k;
    let dependency = if forced { is_independent(s)?.dependency } else { None };
    let certificate = if forced {
        format!(
            "S has m = {m} vectors inside a subspace whose spanning matrix has k = {k} pivots \
             (ℓ = {ell} ≥ k); the REF of S can hold at most k pivots, so m > k forces a free column"
        )
    } else {
        format!("m = {m} does not exceed k = {k}; the bound does not apply (ℓ = {ell})")
    };
    Ok(SizeBound { forced_dependent: forced, spanning_count: ell, dim: k, set_size: m, dependency, certificate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisReason {
    IndependentHenceSpanning,
    SpanningHenceIndependent,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisCheck {
    pub is_basis: bool,
    pub reason: BasisReason,
    pub rank: usize,
    pub count: usize,
    pub expected_dim: usize,
    pub explanation: String,
}

/// Decides whether `vectors` is a basis of a space of dimension
/// `expected_dim` by counting pivots. When `expected_dim` equals the ambient
/// dimension the spanning test (a pivot in every row) decides; otherwise the
/// independence test (a pivot in every column) decides and spanning follows.
pub fn basis_check<T: Scalar>(vectors: &[Vector<T>], expected_dim: usize) -> Result<BasisCheck> {
    let ambient = common_len(&[vectors])?;
    let count = vectors.len();
    let rank = rank_of(vectors)?;
    let fail = |explanation: String| {
        Ok(BasisCheck { is_basis: false, reason: BasisReason::Fails, rank, count, expected_dim, explanation })
    };
    if count < expected_dim {
        return fail(format!("too few vectors: {count} < {expected_dim}; a spanning set needs at least {expected_dim}"));
    }
    if count > expected_dim {
        return fail(format!(
            "too many vectors: {count} > {expected_dim}; an independent set holds at most {expected_dim}"
        ));
    }
    if ambient == Some(expected_dim) {
        if rank == expected_dim {
            return Ok(BasisCheck {
                is_basis: true,
                reason: BasisReason::SpanningHenceIndependent,
                rank,
                count,
                expected_dim,
                explanation: format!("pivot in all {rank} rows: the vectors span, and {count} spanning vectors in dimension {expected_dim} are independent"),
            });
        }
        return fail(format!("only {rank} pivots for {expected_dim} rows: the vectors do not span"));
    }
    if rank == count {
        return Ok(BasisCheck {
            is_basis: true,
            reason: BasisReason::IndependentHenceSpanning,
            rank,
            count,
            expected_dim,
            explanation: format!("pivot in all {count} columns: independent, so they span their {expected_dim}-dimensional span"),
        });
    }
    fail(format!("rank {rank} < count {count}: a free column makes the vectors dependent"))
}

/// Pivot columns of the column matrix: a basis of the span.
pub fn column_space_basis<T: Scalar>(vectors: &[Vector<T>]) -> Result<Vec<Vector<T>>> {
    common_len(&[vectors])?;
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let res = ref_form(&Matrix::from_columns(vectors)?, PivotStrategy::FirstNonzero);
    Ok(res.pivots.iter().map(|&(_, c)| vectors[c].clone()).collect())
}

/// Both directions of "k vectors in a k-dimensional subspace U: independent
/// iff spanning", evaluated separately so they can be compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDuality {
    pub dim: usize,
    pub count: usize,
    pub independent: bool,
    pub spans: bool,
    pub is_basis: bool,
}

pub fn basis_check_within<T: Scalar>(vectors: &[Vector<T>], subspace: &[Vector<T>]) -> Result<BasisDuality> {
    common_len(&[vectors, subspace])?;
    for (index, x) in vectors.iter().enumerate() {
        if !in_span(x, subspace)?.member {
            return Err(Error::NotInSpan { index });
        }
    }
    let dim = rank_of(subspace)?;
    let independent = vectors.is_empty() || is_independent(vectors)?.independent;
    let spans = span_equals(vectors, subspace)?;
    Ok(BasisDuality { dim, count: vectors.len(), independent, spans, is_basis: independent && spans })
}

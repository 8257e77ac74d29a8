//! Row echelon reduction with a recorded step trace.
//!
//! Rows are only ever exchanged, scaled and combined; columns never move, so
//! the pivot positions found here are invariants of the input matrix and the
//! machinery in [`span`] can read independence and spanning questions off
//! them directly.

mod solve;
pub mod span;

pub use solve::{nullspace_basis, nullspace_basis_with, solve, solve_with, Solution};
pub use span::{
    basis_check, basis_check_within, column_space_basis, in_span, independence_size_bound,
    is_independent, span_equals, BasisCheck, BasisDuality, BasisReason, Dependency, Independence,
    SizeBound, SpanMembership,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Entries with `|x| <= DEFAULT_PIVOT_REL_TOL * max(1, max|a_ij|)` count as
/// zero in the float domain.
pub const DEFAULT_PIVOT_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotStrategy {
    /// Topmost nonzero candidate.
    #[default]
    FirstNonzero,
    /// Largest magnitude candidate, ties to the lowest row.
    PartialPivot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchelonOptions {
    pub strategy: PivotStrategy,
    pub rel_tol: f64,
}

impl Default for EchelonOptions {
    fn default() -> Self {
        EchelonOptions { strategy: PivotStrategy::FirstNonzero, rel_tol: DEFAULT_PIVOT_REL_TOL }
    }
}

impl EchelonOptions {
    /// First nonzero for exact scalars, partial pivoting for floats.
    pub fn default_for<T: Scalar>() -> Self {
        let strategy = match T::DOMAIN {
            crate::scalar::Domain::Rational => PivotStrategy::FirstNonzero,
            crate::scalar::Domain::Float => PivotStrategy::PartialPivot,
        };
        EchelonOptions::with_strategy(strategy)
    }

    pub fn with_strategy(strategy: PivotStrategy) -> Self {
        EchelonOptions { strategy, ..Default::default() }
    }

    /// Absolute zero threshold for `a`. Irrelevant for exact scalars.
    pub fn abs_tol<T: Scalar>(&self, a: &Matrix<T>) -> f64 {
        self.rel_tol * a.norm_max().max(1.0)
    }
}

/// One elementary row operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RowOp<T> {
    Swap { i: usize, j: usize },
    Scale { i: usize, factor: T },
    /// `row[dst] += factor * row[src]`.
    AddMultiple { src: usize, factor: T, dst: usize },
}

impl<T: Scalar> RowOp<T> {
    pub fn validate(&self, rows: usize) -> Result<()> {
        let check = |idx: usize| {
            if idx < rows {
                Ok(())
            } else {
                Err(Error::InvalidRowOp(format!("row index {idx} out of range for {rows} rows")))
            }
        };
        match self {
            RowOp::Swap { i, j } => {
                check(*i)?;
                check(*j)
            }
            RowOp::Scale { i, factor } => {
                check(*i)?;
                if factor.is_zero() {
                    return Err(Error::InvalidRowOp("scaling a row by zero is not invertible".into()));
                }
                Ok(())
            }
            RowOp::AddMultiple { src, dst, .. } => {
                check(*src)?;
                check(*dst)?;
                if src == dst {
                    return Err(Error::InvalidRowOp(
                        "adding a multiple of a row to itself is not an elementary operation".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, m: &mut Matrix<T>) -> Result<()> {
        self.validate(m.rows())?;
        match self {
            RowOp::Swap { i, j } => m.swap_rows(*i, *j),
            RowOp::Scale { i, factor } => {
                for x in m.row_mut(*i) {
                    *x = x.clone() * factor.clone();
                }
            }
            RowOp::AddMultiple { src, factor, dst } => {
                let source = m.row(*src).to_vec();
                for (x, s) in m.row_mut(*dst).iter_mut().zip(source) {
                    *x = x.clone() + factor.clone() * s;
                }
            }
        }
        Ok(())
    }

    pub fn applied(&self, m: &Matrix<T>) -> Result<Matrix<T>> {
        let mut out = m.clone();
        self.apply(&mut out)?;
        Ok(out)
    }

    /// Factor by which this operation multiplies the determinant.
    pub fn det_factor(&self) -> T {
        match self {
            RowOp::Swap { i, j } if i != j => -T::one(),
            RowOp::Swap { .. } => T::one(),
            RowOp::Scale { factor, .. } => factor.clone(),
            RowOp::AddMultiple { .. } => T::one(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RowOp::Swap { i, j } => format!("R{i} <-> R{j}"),
            RowOp::Scale { i, factor } => format!("R{i} <- ({factor}) R{i}"),
            RowOp::AddMultiple { src, factor, dst } => format!("R{dst} <- R{dst} + ({factor}) R{src}"),
        }
    }
}

/// `after` is serialized as a bare array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Step<T> {
    pub op: RowOp<T>,
    pub annotation: String,
    #[serde(with = "rows_only")]
    pub after: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct StepTrace<T> {
    pub steps: Vec<Step<T>>,
}

impl<T: Scalar> StepTrace<T> {
    pub fn new() -> Self {
        StepTrace { steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, op: RowOp<T>, annotation: impl Into<String>, after: &Matrix<T>) {
        self.steps.push(Step { op, annotation: annotation.into(), after: after.clone() });
    }

    pub fn ops(&self) -> impl Iterator<Item = &RowOp<T>> {
        self.steps.iter().map(|s| &s.op)
    }

    /// Re-applies every operation to `initial`, requiring each snapshot to
    /// match exactly. Returns the final matrix.
    pub fn replay(&self, initial: &Matrix<T>) -> Result<Matrix<T>> {
        let mut m = initial.clone();
        for (k, step) in self.steps.iter().enumerate() {
            step.op
                .apply(&mut m)
                .map_err(|e| Error::ReplayMismatch { step: k, reason: e.to_string() })?;
            if m != step.after {
                return Err(Error::ReplayMismatch {
                    step: k,
                    reason: format!("snapshot after {} does not match", step.op.describe()),
                });
            }
        }
        Ok(m)
    }

    /// Product of the determinant factors of all operations.
    pub fn det_factor(&self) -> T {
        self.ops().fold(T::one(), |acc, op| acc * op.det_factor())
    }
}

pub(crate) mod rows_only {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::matrix::Matrix;
    use crate::scalar::Scalar;

    pub fn serialize<T: Scalar + Serialize, S: Serializer>(m: &Matrix<T>, s: S) -> Result<S::Ok, S::Error> {
        m.to_rows().serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Matrix<T>, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        crate::matrix::io::matrix_from_value(&value).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RefResult<T> {
    #[serde(rename = "ref")]
    pub ref_form: Matrix<T>,
    pub rref: Option<Matrix<T>>,
    /// `(row, col)`, strictly increasing in both coordinates.
    pub pivots: Vec<(usize, usize)>,
    pub free_cols: Vec<usize>,
    pub rank: usize,
    pub trace: StepTrace<T>,
    pub exchange_count: usize,
}

impl<T: Scalar> RefResult<T> {
    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivots.iter().map(|&(_, c)| c).collect()
    }

    /// The reduced matrix: the RREF when computed, else the REF.
    pub fn reduced(&self) -> &Matrix<T> {
        self.rref.as_ref().unwrap_or(&self.ref_form)
    }
}

pub fn ref_form<T: Scalar>(a: &Matrix<T>, strategy: PivotStrategy) -> RefResult<T> {
    ref_with(a, &EchelonOptions::with_strategy(strategy))
}

/// Forward elimination to row echelon form.
pub fn ref_with<T: Scalar>(a: &Matrix<T>, opts: &EchelonOptions) -> RefResult<T> {
    let tol = opts.abs_tol(a);
    let (rows, cols) = a.shape();
    let mut m = a.clone();
    let mut trace = StepTrace::new();
    let mut pivots = Vec::new();
    let mut free_cols = Vec::new();
    let mut exchange_count = 0;
    let mut r = 0;

    for c in 0..cols {
        if r == rows {
            free_cols.push(c);
            continue;
        }
        let chosen = match opts.strategy {
            PivotStrategy::FirstNonzero => (r..rows).find(|&i| !m[(i, c)].negligible(tol)),
            PivotStrategy::PartialPivot => (r..rows)
                .filter(|&i| !m[(i, c)].negligible(tol))
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if m[(i, c)].cmp_abs(&m[(b, c)]).is_le() => Some(b),
                    _ => Some(i),
                }),
        };
        let Some(p) = chosen else {
            // Flush sub-threshold residue so the result is a clean echelon form.
            for i in r..rows {
                m[(i, c)] = T::zero();
            }
            free_cols.push(c);
            continue;
        };
        if p != r {
            let op = RowOp::Swap { i: r, j: p };
            op.apply(&mut m).expect("indices in range");
            exchange_count += 1;
            let why = match opts.strategy {
                PivotStrategy::FirstNonzero => "to bring a nonzero entry into",
                PivotStrategy::PartialPivot => "to bring the largest entry into",
            };
            trace.push(op, format!("swap rows {r} and {p} {why} pivot position ({r},{c})"), &m);
        }
        for i in r + 1..rows {
            if m[(i, c)].negligible(tol) {
                m[(i, c)] = T::zero();
                continue;
            }
            let factor = -(m[(i, c)].clone() / m[(r, c)].clone());
            let op = RowOp::AddMultiple { src: r, factor, dst: i };
            op.apply(&mut m).expect("indices in range");
            m[(i, c)] = T::zero();
            trace.push(op, format!("eliminate below pivot ({r},{c})"), &m);
        }
        pivots.push((r, c));
        r += 1;
    }

    RefResult { ref_form: m, rref: None, rank: pivots.len(), pivots, free_cols, trace, exchange_count }
}

pub fn rref<T: Scalar>(a: &Matrix<T>) -> RefResult<T> {
    rref_with(a, &EchelonOptions::default_for::<T>())
}

/// Forward elimination followed by the backward phase: each pivot scaled to
/// one and cleared above, bottom pivot first.
pub fn rref_with<T: Scalar>(a: &Matrix<T>, opts: &EchelonOptions) -> RefResult<T> {
    let mut res = ref_with(a, opts);
    let mut m = res.ref_form.clone();
    for &(r, c) in res.pivots.iter().rev() {
        if m[(r, c)] != T::one() {
            let op = RowOp::Scale { i: r, factor: T::one() / m[(r, c)].clone() };
            op.apply(&mut m).expect("indices in range");
            m[(r, c)] = T::one();
            res.trace.push(op, format!("scale pivot ({r},{c}) to 1"), &m);
        }
        for i in 0..r {
            if m[(i, c)].is_zero() {
                continue;
            }
            let op = RowOp::AddMultiple { src: r, factor: -m[(i, c)].clone(), dst: i };
            op.apply(&mut m).expect("indices in range");
            m[(i, c)] = T::zero();
            res.trace.push(op, format!("eliminate above pivot ({r},{c})"), &m);
        }
    }
    res.rref = Some(m);
    res
}

/// Column of the first non-negligible entry of row `i`.
fn leading_col<T: Scalar>(m: &Matrix<T>, i: usize, tol: f64) -> Option<usize> {
    m.row(i).iter().position(|x| !x.negligible(tol))
}

/// Every nonzero row starts strictly right of the row above; zero rows last.
pub fn is_ref<T: Scalar>(m: &Matrix<T>) -> bool {
    let tol = EchelonOptions::default().abs_tol(m);
    let mut last: Option<usize> = None;
    let mut seen_zero_row = false;
    for i in 0..m.rows() {
        match leading_col(m, i, tol) {
            None => seen_zero_row = true,
            Some(c) => {
                if seen_zero_row || last.is_some_and(|l| c <= l) {
                    return false;
                }
                last = Some(c);
            }
        }
    }
    true
}

/// REF with unit pivots and zeros above every pivot.
pub fn is_rref<T: Scalar>(m: &Matrix<T>) -> bool {
    if !is_ref(m) {
        return false;
    }
    let tol = EchelonOptions::default().abs_tol(m);
    (0..m.rows()).all(|i| match leading_col(m, i, tol) {
        None => true,
        Some(c) => {
            m[(i, c)] == T::one() && (0..m.rows()).all(|k| k == i || m[(k, c)].negligible(tol))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn ref_examples() {
        let res = ref_form(&Matrix::<Rational>::identity(3), PivotStrategy::FirstNonzero);
        assert_eq!(res.pivots, vec![(0, 0), (1, 1), (2, 2)]);
        assert!(res.free_cols.is_empty());
        assert!(res.trace.is_empty());

        let res = ref_form(&Matrix::<Rational>::zeros(2, 3), PivotStrategy::PartialPivot);
        assert_eq!(res.rank, 0);
        assert_eq!(res.free_cols, vec![0, 1, 2]);

        let res = ref_form(&q(&[&[1, 2], &[2, 4]]), PivotStrategy::FirstNonzero);
        assert_eq!(res.rank, 1);
        assert_eq!(res.pivots, vec![(0, 0)]);
        assert_eq!(res.free_cols, vec![1]);
        assert_eq!(res.ref_form, q(&[&[1, 2], &[0, 0]]));
    }

    #[test]
    fn partial_pivot_picks_largest_and_breaks_ties_low() {
        let res = ref_form(&q(&[&[1, 0], &[-3, 1], &[3, 2]]), PivotStrategy::PartialPivot);
        assert_eq!(res.trace.steps[0].op, RowOp::Swap { i: 0, j: 1 });
        // Column 1 then holds 1/3 and 3 below the first pivot: a second swap.
        assert_eq!(res.exchange_count, 2);
    }

    #[test]
    fn rref_examples() {
        let res = rref(&q(&[&[2, 0], &[0, 3]]));
        assert_eq!(res.rref.unwrap(), Matrix::identity(2));
        let res = rref(&q(&[&[1, 2], &[2, 4]]));
        assert_eq!(res.rref.as_ref().unwrap(), &q(&[&[1, 2], &[0, 0]]));
        let already = q(&[&[1, 0, 3], &[0, 1, -1]]);
        let res = rref(&already);
        assert_eq!(res.rref.unwrap(), already);
        assert!(res.trace.is_empty());
    }

    #[test]
    fn rref_pivots_match_ref() {
        let a = q(&[&[0, 2, 4, 1], &[0, 1, 2, 0], &[3, 0, 1, 1]]);
        let r1 = ref_form(&a, PivotStrategy::FirstNonzero);
        let r2 = rref(&a);
        assert_eq!(r1.pivots, r2.pivots);
        assert!(is_rref(r2.rref.as_ref().unwrap()));
    }

    #[test]
    fn trace_replays_and_json_shape() {
        let a = q(&[&[0, 1], &[1, 1], &[2, 5]]);
        let res = rref(&a);
        assert_eq!(res.trace.replay(&a).unwrap(), *res.reduced());
        let json = serde_json::to_value(&ref_form(&q(&[&[1, 2], &[2, 4]]), PivotStrategy::FirstNonzero).trace)
            .unwrap();
        assert_eq!(
            json,
            serde_json::json!({"steps":[{
                "op":{"kind":"AddMultiple","src":0,"factor":"-2","dst":1},
                "annotation":"eliminate below pivot (0,0)",
                "after":[["1","2"],["0","0"]]
            }]})
        );
        let back: StepTrace<Rational> = serde_json::from_value(json).unwrap();
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn tampered_trace_is_caught() {
        let a = q(&[&[2, 1], &[4, 5]]);
        let mut trace = ref_form(&a, PivotStrategy::FirstNonzero).trace;
        trace.steps[0].after[(1, 1)] = Rational::from_integer(99);
        assert!(matches!(trace.replay(&a), Err(Error::ReplayMismatch { step: 0, .. })));
    }

    #[test]
    fn row_op_validation() {
        let m = Matrix::<Rational>::identity(2);
        assert!(RowOp::Scale { i: 0, factor: Rational::zero() }.applied(&m).is_err());
        assert!(RowOp::Swap { i: 0, j: 2 }.applied(&m).is_err());
        assert!(RowOp::AddMultiple { src: 1, factor: Rational::one(), dst: 1 }.applied(&m).is_err());
        assert_eq!(RowOp::<Rational>::Swap { i: 0, j: 1 }.applied(&m).unwrap(), q(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn float_threshold_detects_rank() {
        let a = Matrix::new(2, 2, vec![1.0, 1.0 / 3.0, 3.0, 1.0]).unwrap();
        let res = ref_form(&a, PivotStrategy::PartialPivot);
        assert_eq!(res.rank, 1);
        assert_eq!(res.ref_form[(1, 1)], 0.0);
        assert!(is_ref(&res.ref_form));
    }

    #[test]
    fn echelon_predicates() {
        assert!(is_ref(&q(&[&[0, 1], &[0, 0]])));
        assert!(!is_ref(&q(&[&[0, 0], &[0, 1]])));
        assert!(!is_ref(&q(&[&[1, 1], &[1, 0]])));
        assert!(is_ref(&Matrix::<Rational>::zeros(2, 2)));
        assert!(!is_rref(&q(&[&[2, 0], &[0, 1]])));
        assert!(!is_rref(&q(&[&[1, 1], &[0, 1]])));
        assert!(is_rref(&q(&[&[1, 5], &[0, 0]])));
    }
}

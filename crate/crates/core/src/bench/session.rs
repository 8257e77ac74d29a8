use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::echelon::{is_ref, is_rref, ref_form, rows_only, rref_with, EchelonOptions, PivotStrategy, RowOp};
use crate::eigen::krylov_annihilator;
use crate::error::{Error, Result};
use crate::factor::det_via_lu;
use crate::matrix::{Matrix, Vector};
use crate::poly::Polynomial;
use crate::scalar::Rational;

pub const TRANSCRIPT_FORMAT: &str = "matrixfirst.transcript";
pub const TRANSCRIPT_VERSION: &str = "v1";

/// What the student is trying to reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[serde(alias = "ref")]
    ReduceToRef,
    #[serde(alias = "rref")]
    ReduceToRref,
    /// Grow `b, Ab, A²b, ...` until the iterates become dependent.
    Krylov { b: Vector<Rational> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    InProgress,
    GoalReached,
}

/// A move in a session: one of the three row operations, or the next
/// Krylov iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SessionOp {
    Swap { i: usize, j: usize },
    Scale { i: usize, factor: Rational },
    AddMultiple { src: usize, factor: Rational, dst: usize },
    NextIterate,
}

impl SessionOp {
    pub fn as_row_op(&self) -> Option<RowOp<Rational>> {
        match self.clone() {
            SessionOp::Swap { i, j } => Some(RowOp::Swap { i, j }),
            SessionOp::Scale { i, factor } => Some(RowOp::Scale { i, factor }),
            SessionOp::AddMultiple { src, factor, dst } => Some(RowOp::AddMultiple { src, factor, dst }),
            SessionOp::NextIterate => None,
        }
    }

    pub fn describe(&self) -> String {
        match self.as_row_op() {
            Some(op) => op.describe(),
            None => "append the next iterate".into(),
        }
    }
}

impl From<RowOp<Rational>> for SessionOp {
    fn from(op: RowOp<Rational>) -> Self {
        match op {
            RowOp::Swap { i, j } => SessionOp::Swap { i, j },
            RowOp::Scale { i, factor } => SessionOp::Scale { i, factor },
            RowOp::AddMultiple { src, factor, dst } => SessionOp::AddMultiple { src, factor, dst },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStep {
    pub op: SessionOp,
    pub annotation: String,
    #[serde(with = "rows_only")]
    pub after: Matrix<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hint {
    pub suggested_op: SessionOp,
    pub rationale: String,
    pub resulting_pivot: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub preview: Matrix<Rational>,
    pub would_reach_goal: bool,
    /// Krylov mode: the annihilator of `b` once the preview is dependent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annihilator: Option<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyOutcome {
    pub accepted: bool,
    pub note: String,
}

/// `det(current) = op_product · det(initial)`, tracked for square row-mode
/// sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetBookkeeping {
    pub initial: Rational,
    pub current: Rational,
    pub op_product: Rational,
    pub holds: bool,
}

/// Wire snapshot of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub mode: Mode,
    pub status: Status,
    pub current: Matrix<Rational>,
    pub step_count: usize,
    pub pivots: Vec<(usize, usize)>,
    pub free_cols: Vec<usize>,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annihilator: Option<Polynomial>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub det: Option<DetBookkeeping>,
    pub hash: String,
}

/// Everything needed to replay and check a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub format: String,
    pub version: String,
    pub id: String,
    pub mode: Mode,
    pub initial: Matrix<Rational>,
    pub steps: Vec<SessionStep>,
    pub current: Matrix<Rational>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    id: String,
    initial: Matrix<Rational>,
    current: Matrix<Rational>,
    history: Vec<SessionStep>,
    mode: Mode,
    status: Status,
}

impl Session {
    pub fn new(id: impl Into<String>, initial: Matrix<Rational>, mode: Mode) -> Result<Self> {
        let current = match &mode {
            Mode::ReduceToRef | Mode::ReduceToRref => initial.clone(),
            Mode::Krylov { b } => {
                let n = initial.require_square()?;
                if b.len() != n {
                    return Err(Error::ShapeMismatch(format!("b has length {}, matrix is {n}x{n}", b.len())));
                }
                if b.iter().all(Rational::is_zero) {
                    return Err(Error::ZeroVector);
                }
                Matrix::from_columns(std::slice::from_ref(b))?
            }
        };
        let mut s = Session { id: id.into(), initial, current, history: Vec::new(), mode, status: Status::InProgress };
        s.status = s.evaluate(&s.current);
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn initial(&self) -> &Matrix<Rational> {
        &self.initial
    }

    pub fn current(&self) -> &Matrix<Rational> {
        &self.current
    }

    pub fn history(&self) -> &[SessionStep] {
        &self.history
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn status(&self) -> Status {
        self.status
    }

    fn evaluate(&self, m: &Matrix<Rational>) -> Status {
        let done = match self.mode {
            Mode::ReduceToRef => is_ref(m),
            Mode::ReduceToRref => is_rref(m),
            Mode::Krylov { .. } => !ref_form(m, PivotStrategy::FirstNonzero).free_cols.is_empty(),
        };
        if done {
            Status::GoalReached
        } else {
            Status::InProgress
        }
    }

    /// The matrix `op` would produce, or why it is not allowed here.
    fn preview(&self, op: &SessionOp) -> Result<Matrix<Rational>> {
        match (&self.mode, op.as_row_op()) {
            (Mode::Krylov { .. }, Some(_)) => {
                Err(Error::InvalidRowOp("row operations are not part of a Krylov session".into()))
            }
            (Mode::Krylov { .. }, None) => {
                if self.status == Status::GoalReached {
                    return Err(Error::InvalidRowOp("the iterates are already dependent".into()));
                }
                let last = self.current.column(self.current.cols() - 1);
                let next = self.initial.mul_vec(&last)?;
                self.current.hstack(&Matrix::from_columns(&[next])?)
            }
            (_, Some(row_op)) => row_op.applied(&self.current),
            (_, None) => Err(Error::InvalidRowOp("only a Krylov session has iterates".into())),
        }
    }

    /// Applies a legal move; an illegal one leaves the session untouched.
    pub fn apply(&mut self, op: SessionOp) -> ApplyOutcome {
        match self.preview(&op) {
            Ok(after) => {
                let note = op.describe();
                self.status = self.evaluate(&after);
                self.current = after.clone();
                self.history.push(SessionStep { op, annotation: note.clone(), after });
                ApplyOutcome { accepted: true, note }
            }
            Err(e) => ApplyOutcome { accepted: false, note: e.to_string() },
        }
    }

    pub fn whatif(&self, op: &SessionOp) -> Result<WhatIf> {
        let preview = self.preview(op)?;
        let would_reach_goal = self.evaluate(&preview) == Status::GoalReached;
        let annihilator = match &self.mode {
            Mode::Krylov { b } if would_reach_goal => Some(krylov_annihilator(&self.initial, b)?.annihilator),
            _ => None,
        };
        Ok(WhatIf { preview, would_reach_goal, annihilator })
    }

    /// The engine's own next move: the first operation of a first-nonzero
    /// reduction of the current matrix, or the next iterate.
    pub fn hint(&self) -> Result<Hint> {
        if self.status == Status::GoalReached {
            return Err(Error::GoalReached);
        }
        if let Mode::Krylov { .. } = self.mode {
            let k = self.current.cols();
            return Ok(Hint {
                suggested_op: SessionOp::NextIterate,
                rationale: format!("{k} independent iterates so far; compute A^{k} b"),
                resulting_pivot: None,
            });
        }
        let opts = EchelonOptions::with_strategy(PivotStrategy::FirstNonzero);
        let res = rref_with(&self.current, &opts);
        let step = res.trace.steps.first().ok_or(Error::GoalReached)?;
        let pivot_row = match &step.op {
            RowOp::Swap { i, .. } => *i,
            RowOp::Scale { i, .. } => *i,
            RowOp::AddMultiple { src, .. } => *src,
        };
        let resulting_pivot = res.pivots.iter().copied().find(|&(r, _)| r == pivot_row);
        Ok(Hint { suggested_op: step.op.clone().into(), rationale: step.annotation.clone(), resulting_pivot })
    }

    pub fn det_bookkeeping(&self) -> Option<DetBookkeeping> {
        if matches!(self.mode, Mode::Krylov { .. }) || !self.initial.is_square() {
            return None;
        }
        let initial = det_via_lu(&self.initial).ok()?;
        let current = det_via_lu(&self.current).ok()?;
        let op_product = self
            .history
            .iter()
            .filter_map(|s| s.op.as_row_op())
            .fold(Rational::one(), |acc, op| acc * op.det_factor());
        let holds = current == &op_product * &initial;
        Some(DetBookkeeping { initial, current, op_product, holds })
    }

    pub fn export(&self) -> Transcript {
        Transcript {
            format: TRANSCRIPT_FORMAT.into(),
            version: TRANSCRIPT_VERSION.into(),
            id: self.id.clone(),
            mode: self.mode.clone(),
            initial: self.initial.clone(),
            steps: self.history.clone(),
            current: self.current.clone(),
            status: self.status,
        }
    }

    /// SHA-256 of the exported transcript.
    pub fn hash(&self) -> String {
        transcript_hash(&self.export())
    }

    pub fn state(&self) -> SessionState {
        let res = ref_form(&self.current, PivotStrategy::FirstNonzero);
        let annihilator = match &self.mode {
            Mode::Krylov { b } if self.status == Status::GoalReached => {
                krylov_annihilator(&self.initial, b).ok().map(|k| k.annihilator)
            }
            _ => None,
        };
        SessionState {
            id: self.id.clone(),
            mode: self.mode.clone(),
            status: self.status,
            current: self.current.clone(),
            step_count: self.history.len(),
            pivots: res.pivots.clone(),
            free_cols: res.free_cols.clone(),
            rank: res.rank,
            annihilator,
            det: self.det_bookkeeping(),
            hash: self.hash(),
        }
    }
}

pub fn transcript_hash(t: &Transcript) -> String {
    let bytes = serde_json::to_vec(t).expect("transcripts always serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Replays a transcript from its initial matrix and checks every snapshot,
/// the final matrix and the goal status.
pub fn verify_transcript(t: &Transcript) -> Result<Session> {
    if t.format != TRANSCRIPT_FORMAT || t.version != TRANSCRIPT_VERSION {
        return Err(Error::Parse(format!("unsupported transcript {} {}", t.format, t.version)));
    }
    let mut s = Session::new(t.id.clone(), t.initial.clone(), t.mode.clone())?;
    for (k, step) in t.steps.iter().enumerate() {
        let outcome = s.apply(step.op.clone());
        if !outcome.accepted {
            return Err(Error::ReplayMismatch { step: k, reason: outcome.note });
        }
        if s.current != step.after {
            return Err(Error::ReplayMismatch { step: k, reason: "snapshot differs from the replayed matrix".into() });
        }
    }
    if s.current != t.current {
        return Err(Error::ReplayMismatch { step: t.steps.len(), reason: "final matrix differs".into() });
    }
    if s.status != t.status {
        return Err(Error::ReplayMismatch { step: t.steps.len(), reason: "recorded goal status is wrong".into() });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows).unwrap()
    }

    fn int(k: i64) -> Rational {
        Rational::from_integer(k)
    }

    #[test]
    fn create_examples() {
        assert_eq!(Session::new("a", Matrix::identity(2), Mode::ReduceToRef).unwrap().status(), Status::GoalReached);
        assert_eq!(Session::new("b", q(&[&[0, 1], &[1, 0]]), Mode::ReduceToRef).unwrap().status(), Status::InProgress);
        assert_eq!(Session::new("c", Matrix::zeros(2, 3), Mode::ReduceToRef).unwrap().status(), Status::GoalReached);
        let zero_b = Mode::Krylov { b: vec![int(0), int(0)] };
        assert_eq!(Session::new("d", Matrix::identity(2), zero_b).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn apply_examples() {
        let mut s = Session::new("a", Matrix::identity(2), Mode::ReduceToRref).unwrap();
        assert!(s.apply(SessionOp::Swap { i: 0, j: 1 }).accepted);
        assert_eq!(s.current(), &q(&[&[0, 1], &[1, 0]]));

        let before = s.hash();
        let out = s.apply(SessionOp::Scale { i: 0, factor: int(0) });
        assert!(!out.accepted);
        assert_eq!(s.hash(), before);
        assert!(!s.apply(SessionOp::AddMultiple { src: 1, factor: int(1), dst: 1 }).accepted);
        assert!(!s.apply(SessionOp::Swap { i: 0, j: 5 }).accepted);
        assert!(!s.apply(SessionOp::NextIterate).accepted);
        assert_eq!(s.hash(), before);

        let mut s = Session::new("b", q(&[&[1, 2], &[2, 4]]), Mode::ReduceToRef).unwrap();
        assert!(s.apply(SessionOp::AddMultiple { src: 0, factor: int(-2), dst: 1 }).accepted);
        assert_eq!(s.current(), &q(&[&[1, 2], &[0, 0]]));
        assert_eq!(s.status(), Status::GoalReached);
    }

    #[test]
    fn hint_examples() {
        let s = Session::new("a", q(&[&[0, 1], &[1, 0]]), Mode::ReduceToRef).unwrap();
        let h = s.hint().unwrap();
        assert_eq!(h.suggested_op, SessionOp::Swap { i: 0, j: 1 });
        assert_eq!(h.resulting_pivot, Some((0, 0)));

        let s = Session::new("b", q(&[&[1, 2], &[2, 4]]), Mode::ReduceToRef).unwrap();
        assert_eq!(s.hint().unwrap().suggested_op, SessionOp::AddMultiple { src: 0, factor: int(-2), dst: 1 });

        let s = Session::new("c", Matrix::identity(2), Mode::ReduceToRref).unwrap();
        assert_eq!(s.hint().unwrap_err(), Error::GoalReached);
    }

    #[test]
    fn whatif_examples() {
        let s = Session::new("a", Matrix::identity(2), Mode::ReduceToRref).unwrap();
        let w = s.whatif(&SessionOp::Swap { i: 0, j: 1 }).unwrap();
        assert_eq!(w.preview, q(&[&[0, 1], &[1, 0]]));
        assert!(!w.would_reach_goal);
        assert_eq!(s.current(), &Matrix::identity(2));

        let mut s = Session::new("b", q(&[&[2, 4], &[1, 3]]), Mode::ReduceToRref).unwrap();
        let op = s.hint().unwrap().suggested_op;
        let w = s.whatif(&op).unwrap();
        s.apply(op);
        assert_eq!(&w.preview, s.current());

        let s = Session::new("c", Matrix::identity(2), Mode::Krylov { b: vec![int(1), int(0)] }).unwrap();
        let w = s.whatif(&SessionOp::NextIterate).unwrap();
        assert!(w.would_reach_goal);
        assert_eq!(w.annihilator, Some(Polynomial::from_i64(&[-1, 1])));
        assert!(s.whatif(&SessionOp::Scale { i: 0, factor: int(0) }).is_err());
    }

    #[test]
    fn krylov_session_runs_to_dependency() {
        let a = q(&[&[2, 0], &[0, 3]]);
        let mut s = Session::new("k", a, Mode::Krylov { b: vec![int(1), int(1)] }).unwrap();
        while s.status() == Status::InProgress {
            let op = s.hint().unwrap().suggested_op;
            assert!(s.apply(op).accepted);
        }
        assert_eq!(s.current().cols(), 3);
        assert_eq!(s.state().annihilator, Some(Polynomial::from_i64(&[6, -5, 1])));
        assert!(!s.apply(SessionOp::NextIterate).accepted);
        verify_transcript(&s.export()).unwrap();
    }

    #[test]
    fn export_and_replay() {
        let mut s = Session::new("a", q(&[&[0, 2], &[3, 1]]), Mode::ReduceToRref).unwrap();
        assert!(s.export().steps.is_empty());
        s.apply(SessionOp::Swap { i: 0, j: 1 });
        s.apply(SessionOp::Scale { i: 0, factor: Rational::new(1, 3).unwrap() });
        let t = s.export();
        assert_eq!(t.steps.len(), 2);
        assert_eq!(verify_transcript(&t).unwrap().current(), s.current());

        let json = serde_json::to_string(&t).unwrap();
        let back: Transcript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);

        let mut tampered = t.clone();
        tampered.steps[1].after[(1, 1)] = int(7);
        assert!(matches!(verify_transcript(&tampered), Err(Error::ReplayMismatch { step: 1, .. })));
    }

    #[test]
    fn determinant_bookkeeping() {
        let mut s = Session::new("a", q(&[&[0, 2, 1], &[3, 1, 0], &[1, 1, 1]]), Mode::ReduceToRref).unwrap();
        s.apply(SessionOp::Swap { i: 0, j: 1 });
        s.apply(SessionOp::Scale { i: 0, factor: Rational::new(1, 3).unwrap() });
        s.apply(SessionOp::AddMultiple { src: 0, factor: int(-1), dst: 2 });
        let d = s.det_bookkeeping().unwrap();
        assert!(d.holds);
        assert_eq!(d.op_product, Rational::new(-1, 3).unwrap());
    }

    #[test]
    fn mode_wire_format() {
        assert_eq!(serde_json::to_value(Mode::ReduceToRef).unwrap(), serde_json::json!("reduce_to_ref"));
        let m: Mode = serde_json::from_value(serde_json::json!("rref")).unwrap();
        assert_eq!(m, Mode::ReduceToRref);
        let m: Mode = serde_json::from_value(serde_json::json!({"krylov": {"b": [1, "1/2"]}})).unwrap();
        assert_eq!(m, Mode::Krylov { b: vec![int(1), Rational::new(1, 2).unwrap()] });
        let op: SessionOp = serde_json::from_value(serde_json::json!({"kind": "NextIterate"})).unwrap();
        assert_eq!(op, SessionOp::NextIterate);
    }
}

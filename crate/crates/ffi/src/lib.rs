//! C ABI over `matrixfirst`.
//!
//! Matrices and sessions are opaque heap handles owned by the caller and
//! released with `mf_matrix_free` / `mf_session_free`. Every fallible call
//! returns an `MfStatus`; on failure the message is kept per thread and read
//! with `mf_last_error_message`. Strings handed out by the library are freed
//! with `mf_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::atomic::{AtomicU64, Ordering};

use matrixfirst::bench::{verify_transcript, Mode, Session, SessionOp, Transcript};
use matrixfirst::compute::{compute_request, ComputeOp, ComputeRequest};
use matrixfirst::echelon::rref;
use matrixfirst::eigen::{francis_qr_eigenvalues, minimal_polynomial};
use matrixfirst::factor::det_via_lu;
use matrixfirst::{basis, AnyMatrix, Domain, Error, Matrix, Rational};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    ShapeMismatch = 4,
    DomainMismatch = 5,
    NotSquare = 6,
    Singular = 7,
    ZeroPivot = 8,
    ZeroVector = 9,
    DimensionTooLarge = 10,
    RankDeficient = 11,
    NoConvergence = 12,
    EmptyEigenspace = 13,
    NotABasis = 14,
    InvalidRowOp = 15,
    GoalReached = 16,
    InvalidArgument = 17,
    ReplayMismatch = 18,
    BufferTooSmall = 19,
    NonFinite = 20,
    Math = 21,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfDomain {
    Rational = 0,
    Float = 1,
}

/// Opaque matrix, rational or float.
pub struct MfMatrix(AnyMatrix);

/// Opaque lesson-bench session over a rational matrix.
pub struct MfSession(Session);

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Buffer { needed: usize },
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = Result<T, Failure>;

fn status_of(e: &Error) -> MfStatus {
    match e {
        Error::Parse(_) => MfStatus::Parse,
        Error::ShapeMismatch(_) => MfStatus::ShapeMismatch,
        Error::DomainMismatch { .. } => MfStatus::DomainMismatch,
        Error::NotSquare { .. } => MfStatus::NotSquare,
        Error::Singular { .. } => MfStatus::Singular,
        Error::ZeroPivot { .. } => MfStatus::ZeroPivot,
        Error::ZeroVector => MfStatus::ZeroVector,
        Error::DimensionTooLarge { .. } => MfStatus::DimensionTooLarge,
        Error::RankDeficient { .. } => MfStatus::RankDeficient,
        Error::NoConvergence { .. } => MfStatus::NoConvergence,
        Error::EmptyEigenspace { .. } => MfStatus::EmptyEigenspace,
        Error::NotABasis(_) => MfStatus::NotABasis,
        Error::InvalidRowOp(_) => MfStatus::InvalidRowOp,
        Error::GoalReached => MfStatus::GoalReached,
        Error::InvalidArgument(_) => MfStatus::InvalidArgument,
        Error::ReplayMismatch { .. } => MfStatus::ReplayMismatch,
        Error::NonFinite { .. } => MfStatus::NonFinite,
        Error::ZeroPolynomialDivisor
        | Error::BothPolynomialsZero
        | Error::NotDiagonal { .. }
        | Error::NotInSpan { .. }
        | Error::ZeroColumnNorm { .. }
        | Error::UnknownSession(_) => MfStatus::Math,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Res<()>) -> MfStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MfStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            MfStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(what))) => {
            set_last_error(format!("{what} is not valid UTF-8"));
            MfStatus::InvalidUtf8
        }
        Ok(Err(Failure::Buffer { needed })) => {
            set_last_error(format!("buffer too small, {needed} entries needed"));
            MfStatus::BufferTooSmall
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Res<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &'static str) -> Res<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Res<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul removed").into_raw()
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Res<()> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(to_c_string(s));
    Ok(())
}

unsafe fn put_json<S: serde::Serialize>(out: *mut *mut c_char, v: &S) -> Res<()> {
    put_string(out, serde_json::to_string(v).expect("responses serialize"))
}

fn json_arg<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Res<T> {
    serde_json::from_str(text).map_err(|e| Failure::Core(Error::Parse(format!("{what}: {e}"))))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next library call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code, e.g. "singular_matrix".
#[no_mangle]
pub extern "C" fn mf_status_name(status: MfStatus) -> *const c_char {
    let s: &'static CStr = match status {
        MfStatus::Ok => c"ok",
        MfStatus::NullPointer => c"null_pointer",
        MfStatus::InvalidUtf8 => c"invalid_utf8",
        MfStatus::Parse => c"parse_error",
        MfStatus::ShapeMismatch => c"shape_mismatch",
        MfStatus::DomainMismatch => c"domain_mismatch",
        MfStatus::NotSquare => c"not_square",
        MfStatus::Singular => c"singular_matrix",
        MfStatus::ZeroPivot => c"zero_pivot",
        MfStatus::ZeroVector => c"zero_vector",
        MfStatus::DimensionTooLarge => c"dimension_too_large",
        MfStatus::RankDeficient => c"rank_deficient",
        MfStatus::NoConvergence => c"no_convergence",
        MfStatus::EmptyEigenspace => c"empty_eigenspace",
        MfStatus::NotABasis => c"not_a_basis",
        MfStatus::InvalidRowOp => c"invalid_row_op",
        MfStatus::GoalReached => c"goal_reached",
        MfStatus::InvalidArgument => c"invalid_argument",
        MfStatus::ReplayMismatch => c"replay_mismatch",
        MfStatus::BufferTooSmall => c"buffer_too_small",
        MfStatus::NonFinite => c"non_finite",
        MfStatus::Math => c"math_error",
        MfStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses CSV rows or a JSON `{"rows","cols","data"}` object.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_parse(text: *const c_char, domain: MfDomain, out: *mut *mut MfMatrix) -> MfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let d = match domain {
            MfDomain::Rational => Domain::Rational,
            MfDomain::Float => Domain::Float,
        };
        let m = AnyMatrix::parse(text, d)?;
        put(out, Box::into_raw(Box::new(MfMatrix(m))), "out")
    })
}

/// Float matrix from `rows * cols` row-major entries.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_from_f64(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut MfMatrix,
) -> MfStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or(Error::InvalidArgument("shape overflows".into()))?;
        if data.is_null() && len > 0 {
            return Err(Failure::Null("data"));
        }
        let entries = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(data, len).to_vec() };
        for (k, x) in entries.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { row: k / cols, col: k % cols }.into());
            }
        }
        let m = Matrix::new(rows, cols, entries)?;
        put(out, Box::into_raw(Box::new(MfMatrix(AnyMatrix::Float(m)))), "out")
    })
}

/// Exact matrix from `rows * cols` row-major integers.
///
/// # Safety
/// `data` must point to `rows * cols` int64 values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_from_i64(
    rows: usize,
    cols: usize,
    data: *const i64,
    out: *mut *mut MfMatrix,
) -> MfStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or(Error::InvalidArgument("shape overflows".into()))?;
        if data.is_null() && len > 0 {
            return Err(Failure::Null("data"));
        }
        let entries: Vec<Rational> =
            if len == 0 { Vec::new() } else { std::slice::from_raw_parts(data, len).iter().map(|&x| Rational::from(x)).collect() };
        let m = Matrix::new(rows, cols, entries)?;
        put(out, Box::into_raw(Box::new(MfMatrix(AnyMatrix::Rational(m)))), "out")
    })
}

/// Releases a matrix. NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_free(m: *mut MfMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `rows`, `cols` and `domain` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_shape(
    m: *const MfMatrix,
    rows: *mut usize,
    cols: *mut usize,
    domain: *mut MfDomain,
) -> MfStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let (r, c) = m.0.shape();
        put(rows, r, "rows")?;
        put(cols, c, "cols")?;
        let d = match m.0.domain() {
            Domain::Rational => MfDomain::Rational,
            Domain::Float => MfDomain::Float,
        };
        put(domain, d, "domain")
    })
}

/// Copies the entries, rounded to double, row-major into `buf`.
/// Fails with `BUFFER_TOO_SMALL` when `len < rows * cols`.
///
/// # Safety
/// `m` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_copy_f64(m: *const MfMatrix, buf: *mut f64, len: usize) -> MfStatus {
    guard(|| {
        let m = handle(m, "matrix")?.0.to_f64();
        let data = m.data();
        if len < data.len() {
            return Err(Failure::Buffer { needed: data.len() });
        }
        if data.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// JSON form `{"rows","cols","data"}`; exact entries are strings like "-3/4".
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_matrix_to_json(m: *const MfMatrix, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        put_json(out, &m.0.to_json())
    })
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_rank(m: *const MfMatrix, out: *mut usize) -> MfStatus {
    guard(|| {
        let rank = match &handle(m, "matrix")?.0 {
            AnyMatrix::Rational(a) => rref(a).rank,
            AnyMatrix::Float(a) => rref(a).rank,
        };
        put(out, rank, "out")
    })
}

/// Determinant as text: exact "p/q" for rational matrices, a decimal for floats.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_det(m: *const MfMatrix, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let text = match &handle(m, "matrix")?.0 {
            AnyMatrix::Rational(a) => det_via_lu(a)?.to_string(),
            AnyMatrix::Float(a) => det_via_lu(a)?.to_string(),
        };
        put_string(out, text)
    })
}

/// Inverse by Gauss-Jordan, in the domain of the input.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_inverse(m: *const MfMatrix, out: *mut *mut MfMatrix) -> MfStatus {
    guard(|| {
        let inv = match &handle(m, "matrix")?.0 {
            AnyMatrix::Rational(a) => AnyMatrix::Rational(basis::invert(a)?),
            AnyMatrix::Float(a) => AnyMatrix::Float(basis::invert(a)?),
        };
        put(out, Box::into_raw(Box::new(MfMatrix(inv))), "out")
    })
}

/// Minimal polynomial of a rational matrix, as JSON
/// `{"text": "x^2 - 1", "coeffs": ["-1", "0", "1"]}` with ascending coefficients.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_minpoly(m: *const MfMatrix, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let a = handle(m, "matrix")?.0.as_rational()?;
        let p = minimal_polynomial(a)?;
        let coeffs: Vec<String> = p.coeffs().iter().map(ToString::to_string).collect();
        put_json(out, &serde_json::json!({ "text": p.to_string(), "coeffs": coeffs }))
    })
}

/// Eigenvalues with algebraic multiplicity, `n` of them, ordered by
/// descending modulus. `count` always receives `n`; when `cap < n` nothing is
/// written and `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_eigenvalues(
    m: *const MfMatrix,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    count: *mut usize,
) -> MfStatus {
    guard(|| {
        let a = handle(m, "matrix")?.0.to_f64();
        let res = francis_qr_eigenvalues(&a, None)?;
        let values = res.with_multiplicity();
        put(count, values.len(), "count")?;
        if cap < values.len() {
            return Err(Failure::Buffer { needed: values.len() });
        }
        if values.is_empty() {
            return Ok(());
        }
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        for (k, z) in values.iter().enumerate() {
            re.add(k).write(z.re);
            im.add(k).write(z.im);
        }
        Ok(())
    })
}

/// Runs a named computation ("rref", "lu", "eig", ...) on a JSON request
/// `{"matrix": ..., "args": {...}}`, the same body the HTTP API accepts.
///
/// # Safety
/// `op` and `request` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_compute_json(op: *const c_char, request: *const c_char, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let op: ComputeOp = str_arg(op, "op")?.parse()?;
        let req: ComputeRequest = json_arg(str_arg(request, "request")?, "request")?;
        let v = compute_request(op, &req)?;
        put_json(out, &v)
    })
}

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// Starts a session on a rational matrix. `mode_json` is `"reduce_to_ref"`,
/// `"reduce_to_rref"` or `{"krylov": {"b": [...]}}`.
///
/// # Safety
/// `m` must be a live handle; `mode_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_new(
    m: *const MfMatrix,
    mode_json: *const c_char,
    out: *mut *mut MfSession,
) -> MfStatus {
    guard(|| {
        let a = handle(m, "matrix")?.0.as_rational()?.clone();
        let mode: Mode = json_arg(str_arg(mode_json, "mode")?, "mode")?;
        let id = format!("ffi-{:016x}", NEXT_SESSION.fetch_add(1, Ordering::Relaxed));
        let s = Session::new(id, a, mode)?;
        put(out, Box::into_raw(Box::new(MfSession(s))), "out")
    })
}

/// Releases a session. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_session_free(s: *mut MfSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Applies `{"kind": "Swap", "i": 0, "j": 1}` style operations. An illegal
/// move is not an error: the result has `"accepted": false` and the state is
/// unchanged. Result: `{"accepted", "note", "state"}`.
///
/// # Safety
/// `s` must be a live handle; `op_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_apply(s: *mut MfSession, op_json: *const c_char, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let s = handle_mut(s, "session")?;
        let op: SessionOp = json_arg(str_arg(op_json, "op")?, "op")?;
        let outcome = s.0.apply(op);
        put_json(out, &serde_json::json!({ "accepted": outcome.accepted, "note": outcome.note, "state": s.0.state() }))
    })
}

/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_state(s: *const MfSession, out: *mut *mut c_char) -> MfStatus {
    guard(|| put_json(out, &handle(s, "session")?.0.state()))
}

/// Suggested next operation; `GOAL_REACHED` once the goal is met.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_hint(s: *const MfSession, out: *mut *mut c_char) -> MfStatus {
    guard(|| put_json(out, &handle(s, "session")?.0.hint()?))
}

/// Preview of an operation without applying it.
///
/// # Safety
/// `s` must be a live handle; `op_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_whatif(
    s: *const MfSession,
    op_json: *const c_char,
    out: *mut *mut c_char,
) -> MfStatus {
    guard(|| {
        let s = handle(s, "session")?;
        let op: SessionOp = json_arg(str_arg(op_json, "op")?, "op")?;
        put_json(out, &s.0.whatif(&op)?)
    })
}

/// Replayable transcript of the session.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_session_export(s: *const MfSession, out: *mut *mut c_char) -> MfStatus {
    guard(|| put_json(out, &handle(s, "session")?.0.export()))
}

/// Replays a transcript and checks every recorded matrix and the final
/// state. On success `out` receives `{"valid": true, "steps", "status"}`.
///
/// # Safety
/// `transcript_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_transcript_verify(transcript_json: *const c_char, out: *mut *mut c_char) -> MfStatus {
    guard(|| {
        let t: Transcript = json_arg(str_arg(transcript_json, "transcript")?, "transcript")?;
        let s = verify_transcript(&t)?;
        put_json(out, &serde_json::json!({ "valid": true, "steps": s.history().len(), "status": s.status() }))
    })
}

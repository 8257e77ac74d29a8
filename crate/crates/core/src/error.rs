use thiserror::Error;

use crate::scalar::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: Domain, found: Domain },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular: rank {rank}, free columns {free_cols:?}")]
    Singular { rank: usize, free_cols: Vec<usize> },

    #[error("zero pivot at ({row}, {col}) without row exchanges")]
    ZeroPivot { row: usize, col: usize },

    #[error("division by the zero polynomial")]
    ZeroPolynomialDivisor,

    #[error("gcd/lcm of two zero polynomials is undefined")]
    BothPolynomialsZero,

    #[error("starting vector must be nonzero")]
    ZeroVector,

    #[error("dimension {n} exceeds the limit {max} for n! expansion")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("matrix is rank deficient: |r({col},{col})| = {value:e} is below threshold")]
    RankDeficient { col: usize, value: f64 },

    #[error("QR iteration did not converge after {sweeps} sweeps ({deflated} of {n} eigenvalues deflated)")]
    NoConvergence {
        sweeps: usize,
        deflated: usize,
        n: usize,
        partial: Vec<crate::scalar::ComplexF>,
    },

    #[error("{lambda} is not an eigenvalue at the working tolerance")]
    EmptyEigenspace { lambda: String },

    #[error("basis does not diagonalize the matrix: off-diagonal residual {residual:e}")]
    NotDiagonal { residual: f64 },

    #[error("vectors do not form a basis: {0}")]
    NotABasis(String),

    #[error("vector {index} of S is not in the span of the spanning set")]
    NotInSpan { index: usize },

    #[error("zero column norm at column {col}")]
    ZeroColumnNorm { col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid row operation: {0}")]
    InvalidRowOp(String),

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("goal already reached")]
    GoalReached,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("replay diverges at step {step}: {reason}")]
    ReplayMismatch { step: usize, reason: String },
}

impl Error {
    /// Stable machine-readable code, shared by the HTTP API, the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse_error",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::DomainMismatch { .. } => "domain_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::Singular { .. } => "singular_matrix",
            Error::ZeroPivot { .. } => "zero_pivot",
            Error::ZeroPolynomialDivisor => "zero_divisor",
            Error::BothPolynomialsZero => "both_zero",
            Error::ZeroVector => "zero_vector",
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NoConvergence { .. } => "no_convergence",
            Error::EmptyEigenspace { .. } => "empty_eigenspace",
            Error::NotDiagonal { .. } => "not_diagonal",
            Error::NotABasis(_) => "not_a_basis",
            Error::NotInSpan { .. } => "not_in_span",
            Error::ZeroColumnNorm { .. } => "zero_column_norm",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidRowOp(_) => "invalid_row_op",
            Error::UnknownSession(_) => "unknown_session",
            Error::GoalReached => "goal_reached",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ReplayMismatch { .. } => "replay_mismatch",
        }
    }

    /// Input could not be understood at all, as opposed to a well-formed
    /// question with a mathematically negative answer.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::ShapeMismatch(_)
                | Error::DomainMismatch { .. }
                | Error::NonFinite { .. }
                | Error::InvalidArgument(_)
        )
    }
}

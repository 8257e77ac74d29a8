//! LR factorization, determinants, Householder and Givens transforms,
//! classical Gram–Schmidt and least squares.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::echelon::{RowOp, StepTrace, DEFAULT_PIVOT_REL_TOL};
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix, Vector};
use crate::scalar::{Domain, Scalar};

/// Largest n accepted by the n!-term determinant expansion.
pub const PERMUTATION_ORACLE_MAX_N: usize = 8;

pub const RANK_DEFICIENCY_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LuPivoting {
    /// Fails on a zero pivot that a row exchange could fix.
    None,
    /// First nonzero entry at or below the diagonal.
    FirstNonzero,
    /// Largest magnitude at or below the diagonal.
    #[default]
    Partial,
}

impl LuPivoting {
    pub fn default_for<T: Scalar>() -> Self {
        match T::DOMAIN {
            Domain::Rational => LuPivoting::FirstNonzero,
            Domain::Float => LuPivoting::Partial,
        }
    }
}

/// `P A = L R` with `perm[i]` the row of `A` that ends up in row `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct LuFactors<T> {
    #[serde(rename = "L")]
    pub l: Matrix<T>,
    #[serde(rename = "R")]
    pub r: Matrix<T>,
    pub perm: Vec<usize>,
    #[serde(rename = "ex")]
    pub exchange_count: usize,
    /// Elimination history on `A`, ending at `R`.
    #[serde(skip, default = "StepTrace::new")]
    pub trace: StepTrace<T>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn permutation_matrix(&self) -> Matrix<T> {
        let n = self.perm.len();
        let mut p = Matrix::zeros(n, n);
        for (i, &src) in self.perm.iter().enumerate() {
            p[(i, src)] = T::one();
        }
        p
    }

    /// `(-1)^ex · Π r_ii`.
    pub fn det(&self) -> T {
        let prod = (0..self.r.rows()).fold(T::one(), |acc, i| acc * self.r[(i, i)].clone());
        if self.exchange_count % 2 == 1 {
            -prod
        } else {
            prod
        }
    }
}

pub fn lu<T: Scalar>(a: &Matrix<T>, pivoting: LuPivoting) -> Result<LuFactors<T>> {
    let n = a.require_square()?;
    let tol = DEFAULT_PIVOT_REL_TOL * a.norm_max().max(1.0);
    let tol = if T::DOMAIN == Domain::Rational { 0.0 } else { tol };
    let mut r = a.clone();
    let mut l = Matrix::<T>::identity(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut exchange_count = 0;
    let mut trace = StepTrace::new();

    for k in 0..n {
        let chosen = match pivoting {
            LuPivoting::None => {
                if r[(k, k)].negligible(tol) {
                    if (k + 1..n).any(|i| !r[(i, k)].negligible(tol)) {
                        return Err(Error::ZeroPivot { row: k, col: k });
                    }
                    None
                } else {
                    Some(k)
                }
            }
            LuPivoting::FirstNonzero => (k..n).find(|&i| !r[(i, k)].negligible(tol)),
            LuPivoting::Partial => (k..n)
                .filter(|&i| !r[(i, k)].negligible(tol))
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if r[(i, k)].cmp_abs(&r[(b, k)]).is_le() => Some(b),
                    _ => Some(i),
                }),
        };
        let Some(p) = chosen else {
            // Nothing to eliminate: R gets a zero on the diagonal.
            for i in k..n {
                r[(i, k)] = T::zero();
            }
            continue;
        };
        if p != k {
            r.swap_rows(k, p);
            perm.swap(k, p);
            for j in 0..k {
                let tmp = l[(k, j)].clone();
                l[(k, j)] = l[(p, j)].clone();
                l[(p, j)] = tmp;
            }
            exchange_count += 1;
            trace.push(RowOp::Swap { i: k, j: p }, format!("exchange rows {k} and {p}"), &r);
        }
        for i in k + 1..n {
            if r[(i, k)].negligible(tol) {
                r[(i, k)] = T::zero();
                continue;
            }
            let m = r[(i, k)].clone() / r[(k, k)].clone();
            let op = RowOp::AddMultiple { src: k, factor: -m.clone(), dst: i };
            op.apply(&mut r).expect("indices in range");
            r[(i, k)] = T::zero();
            l[(i, k)] = m;
            trace.push(op, format!("eliminate below pivot ({k},{k})"), &r);
        }
    }
    Ok(LuFactors { l, r, perm, exchange_count, trace })
}

/// `det(A) = (-1)^ex Π r_ii` from an LR factorization. Singular input gives 0.
pub fn det_via_lu<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    Ok(lu(a, LuPivoting::default_for::<T>())?.det())
}

/// Sum over all n! permutations of signed products. Only for small n.
pub fn det_permutation_oracle<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let n = a.require_square()?;
    if n > PERMUTATION_ORACLE_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: PERMUTATION_ORACLE_MAX_N });
    }
    let mut total = T::zero();
    for sigma in (0..n).permutations(n) {
        let term = sigma.iter().enumerate().fold(T::one(), |acc, (i, &j)| acc * a[(i, j)].clone());
        if permutation_sign(&sigma) < 0 {
            total = total - term;
        } else {
            total = total + term;
        }
    }
    Ok(total)
}

/// +1 or -1 by inversion count.
pub fn permutation_sign(sigma: &[usize]) -> i32 {
    let inversions = sigma.iter().tuple_combinations().filter(|(a, b)| a > b).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `H = I - beta v vᵀ` acting on rows `col..` with `v[0] = 1`.
/// `beta = 0` marks a column that was already reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    pub col: usize,
    pub v: Vec<f64>,
    pub beta: f64,
}

impl Reflector {
    fn apply_left(&self, m: &mut Matrix<f64>) {
        if self.beta == 0.0 {
            return;
        }
        let k = self.col;
        for j in 0..m.cols() {
            let s: f64 = self.v.iter().enumerate().map(|(t, vt)| vt * m[(k + t, j)]).sum();
            let s = self.beta * s;
            for (t, vt) in self.v.iter().enumerate() {
                m[(k + t, j)] -= s * vt;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrFactors {
    #[serde(rename = "Q")]
    pub q: Matrix<f64>,
    #[serde(rename = "R")]
    pub r: Matrix<f64>,
    pub reflectors: Vec<Reflector>,
}

fn require_tall(a: &Matrix<f64>) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::ShapeMismatch(format!("need rows >= cols, got {}x{}", a.rows(), a.cols())));
    }
    Ok(())
}

/// Full QR: `Q` is m×m orthogonal, `R` is m×n upper triangular.
pub fn householder_qr(a: &Matrix<f64>) -> Result<QrFactors> {
    require_tall(a)?;
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut reflectors = Vec::with_capacity(n);
    for k in 0..n.min(m) {
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|t| t * t).sum();
        if tail == 0.0 {
            reflectors.push(Reflector { col: k, v: unit_head(m - k), beta: 0.0 });
            continue;
        }
        let norm = (x[0] * x[0] + tail).sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let head = x[0] - alpha;
        let mut v: Vec<f64> = x.iter().map(|t| t / head).collect();
        v[0] = 1.0;
        let beta = 2.0 / v.iter().map(|t| t * t).sum::<f64>();
        let h = Reflector { col: k, v, beta };
        h.apply_left(&mut r);
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        reflectors.push(h);
    }
    let mut q = Matrix::identity(m);
    for h in reflectors.iter().rev() {
        h.apply_left(&mut q);
    }
    Ok(QrFactors { q, r, reflectors })
}

fn unit_head(len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[0] = 1.0;
    v
}

/// Plane rotation in coordinates `i`, `j`: `(i,j) = -sin θ`, `(j,i) = sin θ`.
pub fn givens(n: usize, i: usize, j: usize, theta: f64) -> Result<Matrix<f64>> {
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidArgument(format!("givens needs distinct rows below {n}, got {i} and {j}")));
    }
    let (s, c) = theta.sin_cos();
    let mut g = Matrix::identity(n);
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    Ok(g)
}

/// Orthonormal columns `q` (m×n) and upper triangular `r` (n×n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinQr {
    #[serde(rename = "Q")]
    pub q: Matrix<f64>,
    #[serde(rename = "R")]
    pub r: Matrix<f64>,
}

/// Classical Gram–Schmidt: every projection coefficient is taken against
/// the original column. Fails when a column's remainder is zero to rounding.
pub fn classical_gram_schmidt(a: &Matrix<f64>) -> Result<ThinQr> {
    require_tall(a)?;
    let (m, n) = a.shape();
    let mut q = Matrix::zeros(m, n);
    let mut r = Matrix::zeros(n, n);
    let mut basis: Vec<Vector<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let aj = a.column(j);
        let mut v = aj.clone();
        for (i, qi) in basis.iter().enumerate() {
            let rij = dot(qi, &aj);
            r[(i, j)] = rij;
            for (vt, qt) in v.iter_mut().zip(qi) {
                *vt -= rij * qt;
            }
        }
        let norm = dot(&v, &v).sqrt();
        // Cancellation down to rounding level means the column added nothing.
        if norm <= f64::EPSILON * dot(&aj, &aj).sqrt() {
            return Err(Error::ZeroColumnNorm { col: j });
        }
        r[(j, j)] = norm;
        let qj: Vector<f64> = v.iter().map(|t| t / norm).collect();
        for (i, t) in qj.iter().enumerate() {
            q[(i, j)] = *t;
        }
        basis.push(qj);
    }
    Ok(ThinQr { q, r })
}

/// `‖QᵀQ - I‖_max`.
pub fn orthogonality_deviation(q: &Matrix<f64>) -> f64 {
    let gram = q.transpose().matmul(q).expect("QᵀQ is conformable");
    gram.max_abs_diff(&Matrix::identity(q.cols()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsComparison {
    pub n: usize,
    pub gram_schmidt_deviation: f64,
    pub householder_deviation: f64,
    /// Gram–Schmidt deviation over Householder deviation.
    pub ratio: f64,
}

/// Orthogonality loss of both methods on a matrix.
pub fn gs_compare(a: &Matrix<f64>) -> Result<GsComparison> {
    let gs = orthogonality_deviation(&classical_gram_schmidt(a)?.q);
    let hh = orthogonality_deviation(&householder_qr(a)?.q);
    // Householder can come out exactly orthogonal on tiny inputs.
    let ratio = if hh == 0.0 { f64::INFINITY } else { gs / hh };
    Ok(GsComparison { n: a.cols(), gram_schmidt_deviation: gs, householder_deviation: hh, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastSquares {
    pub x: Vector<f64>,
    pub residual_norm: f64,
}

/// Minimizes `‖b - Ax‖` through `R x = Qᵀ b`.
pub fn least_squares(a: &Matrix<f64>, b: &[f64]) -> Result<LeastSquares> {
    require_tall(a)?;
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::ShapeMismatch(format!("right-hand side has length {}, matrix has {m} rows", b.len())));
    }
    let qr = householder_qr(a)?;
    let threshold = RANK_DEFICIENCY_REL_TOL * a.norm_max();
    for i in 0..n {
        let value = qr.r[(i, i)].abs();
        if value <= threshold {
            return Err(Error::RankDeficient { col: i, value });
        }
    }
    let qtb = qr.q.transpose().mul_vec(b)?;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| qr.r[(i, j)] * x[j]).sum();
        x[i] = (qtb[i] - s) / qr.r[(i, i)];
    }
    let ax = a.mul_vec(&x)?;
    let residual_norm = b.iter().zip(&ax).map(|(bi, yi)| (bi - yi).powi(2)).sum::<f64>().sqrt();
    Ok(LeastSquares { x, residual_norm })
}

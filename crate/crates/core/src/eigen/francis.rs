use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::ComplexF;

pub const DEFLATION_REL_TOL: f64 = 1e-13;

/// Computed eigenvalues closer than this (relative to `max(1, ‖A‖_F)`) are
/// reported as one eigenvalue with multiplicity.
pub const MULTIPLICITY_REL_TOL: f64 = 1e-6;

/// Eigenvector residual above which no eigenvector is returned.
pub const EIGENVECTOR_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hessenberg {
    #[serde(rename = "H")]
    pub h: Matrix<f64>,
    #[serde(rename = "Q")]
    pub q: Matrix<f64>,
}

/// `v` with `v[0] = 1` and `beta` such that `(I - beta v vᵀ) x` is a
/// multiple of `e_1`. `None` when `x` already is one.
fn house(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let tail: f64 = x[1..].iter().map(|t| t * t).sum();
    if tail == 0.0 {
        return None;
    }
    let norm = (x[0] * x[0] + tail).sqrt();
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let head = x[0] - alpha;
    let mut v: Vec<f64> = x.iter().map(|t| t / head).collect();
    v[0] = 1.0;
    let beta = 2.0 / v.iter().map(|t| t * t).sum::<f64>();
    Some((v, beta))
}

/// Rows `r0..r0+len(v)` of `m` times the reflector, columns `cols`.
fn reflect_rows(m: &mut Matrix<f64>, v: &[f64], beta: f64, r0: usize, cols: std::ops::Range<usize>) {
    for j in cols {
        let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * m[(r0 + t, j)]).sum::<f64>() * beta;
        for (t, vt) in v.iter().enumerate() {
            m[(r0 + t, j)] -= s * vt;
        }
    }
}

/// Columns `c0..c0+len(v)` of `m` times the reflector, rows `rows`.
fn reflect_cols(m: &mut Matrix<f64>, v: &[f64], beta: f64, c0: usize, rows: std::ops::Range<usize>) {
    for i in rows {
        let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * m[(i, c0 + t)]).sum::<f64>() * beta;
        for (t, vt) in v.iter().enumerate() {
            m[(i, c0 + t)] -= s * vt;
        }
    }
}

/// `H = Qᵀ A Q` upper Hessenberg, by Householder reflectors.
pub fn hessenberg(a: &Matrix<f64>) -> Result<Hessenberg> {
    let n = a.require_square()?;
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((v, beta)) = house(&x) else { continue };
        reflect_rows(&mut h, &v, beta, k + 1, 0..n);
        reflect_cols(&mut h, &v, beta, k + 1, 0..n);
        reflect_cols(&mut q, &v, beta, k + 1, 0..n);
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    Ok(Hessenberg { h, q })
}

/// Real Schur form reached by the iteration: `T = Zᵀ A Z`, quasi upper
/// triangular with 1×1 and 2×2 diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Schur {
    pub t: Matrix<f64>,
    pub z: Matrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvalue {
    pub value: ComplexF,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Distinct eigenvalues, descending modulus, then descending real and
    /// imaginary part.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Unit eigenvector per distinct eigenvalue, for real ones only.
    pub eigenvectors: Vec<Option<Vector<f64>>>,
    /// `‖Av - λv‖ / ‖A‖_F` per distinct eigenvalue.
    pub residuals: Vec<f64>,
    /// All n computed eigenvalues before grouping, same order.
    pub raw: Vec<ComplexF>,
    pub iterations_used: usize,
    pub schur: Schur,
}

impl EigenResult {
    /// Every eigenvalue repeated by multiplicity.
    pub fn with_multiplicity(&self) -> Vec<ComplexF> {
        self.eigenvalues.iter().flat_map(|e| std::iter::repeat_n(e.value, e.mult)).collect()
    }

    pub fn sum(&self) -> ComplexF {
        self.raw.iter().sum()
    }

    pub fn product(&self) -> ComplexF {
        self.raw.iter().product()
    }
}

pub fn eigen_order(a: &ComplexF, b: &ComplexF) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

/// Eigenvalues of `[[a, b], [c, d]]`, with the discriminant formed so that
/// nothing cancels.
pub fn eig2x2(a: f64, b: f64, c: f64, d: f64) -> (ComplexF, ComplexF) {
    let p = 0.5 * (a - d);
    let bc = b * c;
    let disc = p * p + bc;
    if disc >= 0.0 {
        let z = p + p.signum() * disc.sqrt();
        // signum(0) is 1 in Rust, so z = 0 only when disc = p = 0.
        if z == 0.0 {
            return (ComplexF::new(d, 0.0), ComplexF::new(d, 0.0));
        }
        (ComplexF::new(d + z, 0.0), ComplexF::new(d - bc / z, 0.0))
    } else {
        let re = d + p;
        let im = (-disc).sqrt();
        (ComplexF::new(re, im), ComplexF::new(re, -im))
    }
}

pub fn default_max_sweeps(n: usize) -> usize {
    30 * n.max(1)
}

/// Hessenberg reduction followed by Francis double-shift QR sweeps.
/// Each sweep chases one bulge through the active window; the shifts are the
/// eigenvalues of the trailing 2×2 block, with exceptional shifts after 10
/// and 20 sweeps without deflation. `max_sweeps = None` means `30 n`.
pub fn francis_qr_eigenvalues(a: &Matrix<f64>, max_sweeps: Option<usize>) -> Result<EigenResult> {
    let n = a.require_square()?;
    let max_sweeps = max_sweeps.unwrap_or_else(|| default_max_sweeps(n));
    let anorm = a.norm_fro();
    let Hessenberg { h: mut t, q: mut z } = hessenberg(a)?;
    let mut found: Vec<ComplexF> = Vec::with_capacity(n);
    let mut sweeps = 0;
    let mut since_deflation = 0;
    let mut hi = n;

    while hi > 0 {
        let top = hi - 1;
        // Lowest row of the unreduced block ending at `top`.
        let mut l = 0;
        for k in (1..=top).rev() {
            let mut s = t[(k - 1, k - 1)].abs() + t[(k, k)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if t[(k, k - 1)].abs() <= DEFLATION_REL_TOL * s {
                t[(k, k - 1)] = 0.0;
                l = k;
                break;
            }
        }
        if l == top {
            found.push(ComplexF::new(t[(top, top)], 0.0));
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if l + 1 == top {
            let (e1, e2) = eig2x2(t[(l, l)], t[(l, top)], t[(top, l)], t[(top, top)]);
            found.push(e1);
            found.push(e2);
            hi -= 2;
            since_deflation = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            found.sort_by(eigen_order);
            return Err(Error::NoConvergence { sweeps, deflated: found.len(), n, partial: found });
        }
        sweeps += 1;
        since_deflation += 1;

        let (s, p) = if since_deflation % 10 == 0 {
            let w = t[(top, top - 1)].abs() + t[(top - 1, top - 2)].abs();
            let h11 = 0.75 * w + t[(top, top)];
            (2.0 * h11, h11 * h11 + 0.4375 * w * w)
        } else {
            let (a11, a12, a21, a22) =
                (t[(top - 1, top - 1)], t[(top - 1, top)], t[(top, top - 1)], t[(top, top)]);
            (a11 + a22, a11 * a22 - a12 * a21)
        };
        francis_sweep(&mut t, &mut z, l, top, s, p);
    }

    found.sort_by(eigen_order);
    let schur = Schur { t, z };
    let (eigenvalues, eigenvectors, residuals) = group_and_verify(a, &found);
    Ok(EigenResult { eigenvalues, eigenvectors, residuals, raw: found, iterations_used: sweeps, schur })
}

/// One implicit double-shift step on rows/columns `l..=m` with shift sum `s`
/// and product `p`, applied to the whole of `t` so that `Zᵀ A Z = T` stays
/// exact.
fn francis_sweep(t: &mut Matrix<f64>, z: &mut Matrix<f64>, l: usize, m: usize, s: f64, p: f64) {
    let n = t.rows();
    let mut x = t[(l, l)] * t[(l, l)] + t[(l, l + 1)] * t[(l + 1, l)] - s * t[(l, l)] + p;
    let mut y = t[(l + 1, l)] * (t[(l, l)] + t[(l + 1, l + 1)] - s);
    let mut w = t[(l + 1, l)] * t[(l + 2, l + 1)];
    for k in l..=m - 2 {
        if let Some((v, beta)) = house(&[x, y, w]) {
            let c0 = if k > l { k - 1 } else { l };
            reflect_rows(t, &v, beta, k, c0..n);
            let r_end = (k + 3).min(m) + 1;
            reflect_cols(t, &v, beta, k, 0..r_end);
            reflect_cols(z, &v, beta, k, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = 0.0;
                t[(k + 2, k - 1)] = 0.0;
            }
        }
        x = t[(k + 1, k)];
        y = t[(k + 2, k)];
        if k + 3 <= m {
            w = t[(k + 3, k)];
        }
    }
    if let Some((v, beta)) = house(&[x, y]) {
        reflect_rows(t, &v, beta, m - 1, m - 2..n);
        reflect_cols(t, &v, beta, m - 1, 0..m + 1);
        reflect_cols(z, &v, beta, m - 1, 0..n);
        t[(m, m - 2)] = 0.0;
    }
}

type Grouped = (Vec<Eigenvalue>, Vec<Option<Vector<f64>>>, Vec<f64>);

fn group_and_verify(a: &Matrix<f64>, sorted: &[ComplexF]) -> Grouped {
    let anorm = a.norm_fro();
    let tol = MULTIPLICITY_REL_TOL * anorm.max(1.0);
    let mut used = vec![false; sorted.len()];
    let mut groups: Vec<Eigenvalue> = Vec::new();
    for i in 0..sorted.len() {
        if used[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..sorted.len()).filter(|&j| !used[j] && (sorted[j] - sorted[i]).norm() <= tol).collect();
        for &j in &members {
            used[j] = true;
        }
        let mean = members.iter().map(|&j| sorted[j]).sum::<ComplexF>() / members.len() as f64;
        // A conjugate pair never collapses onto the real axis by averaging.
        let mean = if members.iter().all(|&j| sorted[j].im == 0.0) { ComplexF::new(mean.re, 0.0) } else { mean };
        groups.push(Eigenvalue { value: mean, mult: members.len() });
    }
    groups.sort_by(|x, y| eigen_order(&x.value, &y.value));

    let scale = if anorm == 0.0 { 1.0 } else { anorm };
    let mut vectors = Vec::with_capacity(groups.len());
    let mut residuals = Vec::with_capacity(groups.len());
    for g in &groups {
        let v = inverse_iteration(a, g.value);
        let residual = complex_residual(a, g.value, &v) / scale;
        residuals.push(residual);
        let real = g.value.im == 0.0 && residual <= EIGENVECTOR_RESIDUAL_TOL;
        vectors.push(real.then(|| realify(&v)));
    }
    (groups, vectors, residuals)
}

fn complex_residual(a: &Matrix<f64>, lambda: ComplexF, v: &[ComplexF]) -> f64 {
    let n = a.rows();
    (0..n)
        .map(|i| {
            let av: ComplexF = (0..n).map(|j| v[j] * a[(i, j)]).sum();
            (av - lambda * v[i]).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Rotates a complex vector so its largest entry is real and positive, then
/// drops the imaginary parts.
fn realify(v: &[ComplexF]) -> Vector<f64> {
    let big = v.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or_default();
    let phase = if big.norm() == 0.0 { ComplexF::new(1.0, 0.0) } else { big.conj() / big.norm() };
    let out: Vec<f64> = v.iter().map(|x| (x * phase).re).collect();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    out.iter().map(|x| x / norm).collect()
}

/// A few steps of inverse iteration with `A - λI`, tiny pivots replaced by
/// a rounding-level value so the solve always goes through.
fn inverse_iteration(a: &Matrix<f64>, lambda: ComplexF) -> Vec<ComplexF> {
    let n = a.rows();
    let floor = f64::EPSILON * a.norm_fro().max(1.0);
    let mut m: Vec<Vec<ComplexF>> = (0..n)
        .map(|i| (0..n).map(|j| ComplexF::new(a[(i, j)], 0.0) - if i == j { lambda } else { 0.0.into() }).collect())
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| m[x][k].norm().total_cmp(&m[y][k].norm())).expect("k < n");
        m.swap(k, p);
        perm.swap(k, p);
        if m[k][k].norm() < floor {
            m[k][k] = ComplexF::new(floor, 0.0);
        }
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            m[i][k] = f;
            let (top, bottom) = m.split_at_mut(i);
            for (x, y) in bottom[0][k + 1..].iter_mut().zip(&top[k][k + 1..]) {
                *x -= f * y;
            }
        }
    }
    let solve = |b: &[ComplexF]| -> Vec<ComplexF> {
        let mut y: Vec<ComplexF> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let sub = m[i][j] * y[j];
                y[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = m[i][j] * y[j];
                y[i] -= sub;
            }
            y[i] /= m[i][i];
        }
        y
    };
    let mut v: Vec<ComplexF> = (0..n).map(|i| ComplexF::new(1.0 + i as f64 / (n as f64 + 1.0), 0.0)).collect();
    for _ in 0..3 {
        v = solve(&v);
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: usize, data: &[f64]) -> Matrix<f64> {
        Matrix::new(n, data.len() / n, data.to_vec()).unwrap()
    }

    fn close(a: ComplexF, re: f64, im: f64) -> bool {
        (a - ComplexF::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn hessenberg_examples() {
        let a = m(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0, 7.0, 8.0]);
        let hs = hessenberg(&a).unwrap();
        assert_eq!(hs.h, a);
        assert_eq!(hs.q, Matrix::identity(3));

        let s = m(4, &[4.0, 1.0, -2.0, 2.0, 1.0, 2.0, 0.0, 1.0, -2.0, 0.0, 3.0, -2.0, 2.0, 1.0, -2.0, -1.0]);
        let hs = hessenberg(&s).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if j > i + 1 {
                    assert!(hs.h[(i, j)].abs() < 1e-13 * s.norm_fro());
                }
            }
        }

        let a = m(5, &(0..25).map(|k| ((k * 13 + 5) % 17) as f64 - 8.0).collect::<Vec<_>>());
        let hs = hessenberg(&a).unwrap();
        let back = hs.q.transpose().matmul(&a).unwrap().matmul(&hs.q).unwrap();
        assert!(back.max_abs_diff(&hs.h) < 1e-12 * a.norm_fro());
        for i in 0..5usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(hs.h[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let r = francis_qr_eigenvalues(&Matrix::diag(&[2.0, 3.0, 5.0]), None).unwrap();
        let vals: Vec<_> = r.eigenvalues.iter().map(|e| e.value).collect();
        assert!(close(vals[0], 5.0, 0.0) && close(vals[1], 3.0, 0.0) && close(vals[2], 2.0, 0.0));

        let r = francis_qr_eigenvalues(&m(2, &[0.0, 1.0, -1.0, 0.0]), None).unwrap();
        assert!(close(r.eigenvalues[0].value, 0.0, 1.0));
        assert!(close(r.eigenvalues[1].value, 0.0, -1.0));
        assert!(r.eigenvectors.iter().all(Option::is_none));
        assert!(r.residuals.iter().all(|&x| x < 1e-12));

        let r = francis_qr_eigenvalues(&m(2, &[2.0, 1.0, 1.0, 2.0]), None).unwrap();
        assert!(close(r.eigenvalues[0].value, 3.0, 0.0) && close(r.eigenvalues[1].value, 1.0, 0.0));
        let v = r.eigenvectors[0].as_ref().unwrap();
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn multiplicity_is_counted() {
        let r = francis_qr_eigenvalues(&Matrix::identity(3), None).unwrap();
        assert_eq!(r.eigenvalues, vec![Eigenvalue { value: ComplexF::new(1.0, 0.0), mult: 3 }]);
        let r = francis_qr_eigenvalues(&m(2, &[1.0, 1.0, 0.0, 1.0]), None).unwrap();
        assert_eq!(r.eigenvalues.len(), 1);
        assert_eq!(r.eigenvalues[0].mult, 2);
    }

    #[test]
    fn larger_matrix_converges_with_schur_form() {
        let n = 7;
        let a = m(n, &(0..n * n).map(|k| ((k * 37 + 11) % 23) as f64 / 3.0 - 3.5).collect::<Vec<_>>());
        let r = francis_qr_eigenvalues(&a, None).unwrap();
        assert_eq!(r.with_multiplicity().len(), n);
        assert!((r.sum().re - a.trace().unwrap()).abs() < 1e-10 * a.norm_fro());
        assert!(r.sum().im.abs() < 1e-10);
        let back = r.schur.z.transpose().matmul(&a).unwrap().matmul(&r.schur.z).unwrap();
        assert!(back.max_abs_diff(&r.schur.t) < 1e-10 * a.norm_fro());
        for i in 2..n {
            for j in 0..i - 1 {
                assert_eq!(r.schur.t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let n = 6;
        let a = m(n, &(0..n * n).map(|k| ((k * 29 + 7) % 19) as f64 - 9.0).collect::<Vec<_>>());
        match francis_qr_eigenvalues(&a, Some(0)) {
            Err(Error::NoConvergence { sweeps: 0, n: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_is_modulus_then_real_then_imaginary() {
        let mut v = vec![ComplexF::new(1.0, 0.0), ComplexF::new(-3.0, 0.0), ComplexF::new(3.0, 0.0), ComplexF::new(0.0, -1.0)];
        v.sort_by(eigen_order);
        assert_eq!(v, vec![ComplexF::new(3.0, 0.0), ComplexF::new(-3.0, 0.0), ComplexF::new(1.0, 0.0), ComplexF::new(0.0, -1.0)]);
    }
}

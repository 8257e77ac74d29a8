//! Linear maps as black boxes, their standard matrix, and planar geometry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Relative violation above which a probed map is declared nonlinear.
pub const LINEARITY_REL_TOL: f64 = 1e-9;

type MapFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A function from R^dim_in to R^dim_out, observed only through evaluation.
pub struct LinearMapProbe {
    pub dim_in: usize,
    pub dim_out: usize,
    eval: MapFn,
}

impl LinearMapProbe {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        LinearMapProbe { dim_in, dim_out, eval: Box::new(eval) }
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let out = (self.eval)(u);
        if out.len() != self.dim_out {
            return Err(Error::ShapeMismatch(format!(
                "map returned a vector of length {}, expected {}",
                out.len(),
                self.dim_out
            )));
        }
        Ok(out)
    }
}

/// Column i is f(e_i).
pub fn standard_matrix(f: &LinearMapProbe) -> Result<Matrix<f64>> {
    let columns = (0..f.dim_in)
        .map(|i| f.eval(&super::unit_vector::<f64>(f.dim_in, i)))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_columns(&columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityCounterexample {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    pub linear_up_to_tol: bool,
    /// Largest relative violation seen over all trials.
    pub max_violation: f64,
    pub counterexample: Option<LinearityCounterexample>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Samples `f(αu + βv) - αf(u) - βf(v)` at random points.
pub fn linearity_probe(f: &LinearMapProbe, trials: usize, seed: u64) -> Result<LinearityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("linearity probe needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LinearityReport { linear_up_to_tol: true, max_violation: 0.0, counterexample: None };
    for _ in 0..trials {
        let u: Vec<f64> = (0..f.dim_in).map(|_| rng.random_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..f.dim_in).map(|_| rng.random_range(-10.0..10.0)).collect();
        let alpha = rng.random_range(-5.0..5.0);
        let beta = rng.random_range(-5.0..5.0);
        let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = f.eval(&mix)?;
        let fu = f.eval(&u)?;
        let fv = f.eval(&v)?;
        let rhs: Vec<f64> = fu.iter().zip(&fv).map(|(a, b)| alpha * a + beta * b).collect();
        let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = norm(&lhs).max(norm(&rhs)).max(1.0);
        let violation = norm(&diff) / scale;
        if violation > report.max_violation {
            report.max_violation = violation;
        }
        if violation > LINEARITY_REL_TOL && report.counterexample.is_none() {
            report.linear_up_to_tol = false;
            report.counterexample = Some(LinearityCounterexample { u, v, alpha, beta, violation });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotReport {
    pub dot: f64,
    pub norm_u: f64,
    pub norm_v: f64,
    /// `None` when either vector is zero.
    pub cos_angle: Option<f64>,
    pub angle: Option<f64>,
    /// `|u||v| - |<u,v>|`, nonnegative up to rounding.
    pub cauchy_schwarz_gap: f64,
}

pub fn dot_norm_angle(u: &[f64], v: &[f64]) -> Result<DotReport> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!("vector lengths {} and {} differ", u.len(), v.len())));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let (norm_u, norm_v) = (norm(u), norm(v));
    let cos_angle = (norm_u > 0.0 && norm_v > 0.0).then(|| (dot / (norm_u * norm_v)).clamp(-1.0, 1.0));
    Ok(DotReport {
        dot,
        norm_u,
        norm_v,
        cos_angle,
        angle: cos_angle.map(f64::acos),
        cauchy_schwarz_gap: norm_u * norm_v - dot.abs(),
    })
}

/// Counterclockwise rotation of the plane by `theta` radians.
pub fn rotation2d(theta: f64) -> Matrix<f64> {
    let (s, c) = theta.sin_cos();
    Matrix::new(2, 2, vec![c, -s, s, c]).expect("finite angle")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    /// `max |QᵀQ - I|`.
    pub deviation: f64,
}

pub fn is_orthogonal(q: &Matrix<f64>, tol: f64) -> Result<OrthogonalityReport> {
    let n = q.require_square()?;
    let gram = q.transpose().matmul(q)?;
    let deviation = gram.max_abs_diff(&Matrix::identity(n));
    Ok(OrthogonalityReport { orthogonal: deviation <= tol, deviation })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    #[test]
    fn standard_matrix_examples() {
        let id = LinearMapProbe::new(3, 3, |u| u.to_vec());
        assert_eq!(standard_matrix(&id).unwrap(), Matrix::identity(3));

        let sum = LinearMapProbe::new(2, 1, |u| vec![u[0] + u[1]]);
        assert_eq!(standard_matrix(&sum).unwrap().to_rows(), vec![vec![1.0, 1.0]]);

        let theta = 0.4_f64;
        let rot = LinearMapProbe::new(2, 2, move |u| {
            vec![theta.cos() * u[0] - theta.sin() * u[1], theta.sin() * u[0] + theta.cos() * u[1]]
        });
        let m = standard_matrix(&rot).unwrap();
        assert!(m.max_abs_diff(&rotation2d(theta)) < 1e-15);
    }

    #[test]
    fn wrong_output_length_is_an_error() {
        let bad = LinearMapProbe::new(2, 2, |u| vec![u[0]]);
        assert!(matches!(standard_matrix(&bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn probe_examples() {
        let double = LinearMapProbe::new(3, 3, |u| u.iter().map(|x| 2.0 * x).collect());
        let r = linearity_probe(&double, 50, 7).unwrap();
        assert!(r.linear_up_to_tol);
        assert!(r.max_violation < 1e-15);

        let affine = LinearMapProbe::new(3, 3, |u| u.iter().map(|x| x + 1.0).collect());
        assert!(linearity_probe(&affine, 10, 7).unwrap().counterexample.is_some());

        let square = LinearMapProbe::new(2, 2, |u| vec![u[0] * u[0], 0.0]);
        let r = linearity_probe(&square, 10, 7).unwrap();
        assert!(!r.linear_up_to_tol);
        // The documented counterexample: any u with u1 != 0 and alpha = 2.
        let f = |x: f64| x * x;
        assert!((f(2.0 * 1.5) - 2.0 * f(1.5)).abs() > 1.0);

        assert!(linearity_probe(&double, 0, 1).is_err());
    }

    #[test]
    fn dot_examples() {
        let r = dot_norm_angle(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r.dot, 0.0);
        assert!((r.angle.unwrap() - FRAC_PI_2).abs() < 1e-15);

        let r = dot_norm_angle(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!((r.cos_angle.unwrap() - 1.0).abs() < 1e-15);
        assert!(r.cauchy_schwarz_gap.abs() < 1e-14);

        let r = dot_norm_angle(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.dot, 11.0);
        assert!((r.cauchy_schwarz_gap - (5.0_f64.sqrt() * 5.0 - 11.0)).abs() < 1e-12);
        assert!((r.cauchy_schwarz_gap - 0.1803).abs() < 1e-4);

        assert_eq!(dot_norm_angle(&[0.0, 0.0], &[1.0, 1.0]).unwrap().cos_angle, None);
        assert!(dot_norm_angle(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation2d(0.0), Matrix::identity(2));
        let e2 = rotation2d(FRAC_PI_2).mul_vec(&[1.0, 0.0]).unwrap();
        assert!(e2[0].abs() < 1e-16 && (e2[1] - 1.0).abs() < 1e-16);
        let composed = rotation2d(0.3).matmul(&rotation2d(1.1)).unwrap();
        assert!(composed.max_abs_diff(&rotation2d(1.4)) < 1e-14);
        let full = rotation2d(PI);
        assert!(full.max_abs_diff(&Matrix::identity(2).scale(&-1.0)) < 1e-15);
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(is_orthogonal(&Matrix::identity(3), 1e-12).unwrap().deviation, 0.0);
        assert!(is_orthogonal(&rotation2d(0.7), 1e-12).unwrap().deviation < 1e-15);
        let shear = Matrix::new(2, 2, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let r = is_orthogonal(&shear, 1e-12).unwrap();
        assert!(!r.orthogonal && r.deviation >= 1.0);
        assert!(is_orthogonal(&Matrix::<f64>::zeros(2, 3), 1e-12).is_err());
    }
}

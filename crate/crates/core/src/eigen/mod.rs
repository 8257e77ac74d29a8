//! Minimal polynomials by Krylov iteration and eigenvalues by Francis QR.

mod francis;
mod krylov;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use francis::{
    default_max_sweeps, eig2x2, eigen_order, francis_qr_eigenvalues, hessenberg, EigenResult, Eigenvalue,
    Hessenberg, Schur, DEFLATION_REL_TOL, EIGENVECTOR_RESIDUAL_TOL, MULTIPLICITY_REL_TOL,
};
pub use krylov::{krylov_annihilator, minimal_polynomial, minimal_polynomial_certified, KrylovResult, MinpolyCertificate};

use crate::echelon::nullspace_basis;
use crate::error::{Error, Result};
use crate::factor::{det_permutation_oracle, PERMUTATION_ORACLE_MAX_N};
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Domain, Rational, Scalar};

/// Basis of the eigenspace of `λ`: exact for rationals; for floats, unit
/// vectors found with the float pivot threshold and kept only when
/// `‖Av - λv‖ <= 1e-8 ‖A‖_F`.
pub fn eigenvectors_for<T: Scalar>(a: &Matrix<T>, lambda: &T) -> Result<Vec<Vector<T>>> {
    let n = a.require_square()?;
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] = shifted[(i, i)].clone() - lambda.clone();
    }
    let mut basis = nullspace_basis(&shifted);
    if T::DOMAIN == Domain::Float {
        let limit = EIGENVECTOR_RESIDUAL_TOL * a.norm_fro();
        basis = basis
            .into_iter()
            .map(|v| {
                let norm = v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt();
                let inv = T::from_f64(1.0 / norm).expect("nonzero norm");
                v.into_iter().map(|x| x * inv.clone()).collect::<Vector<T>>()
            })
            .filter(|v| {
                let r = shifted.mul_vec(v).expect("conformable");
                r.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt() <= limit
            })
            .collect();
    }
    if basis.is_empty() {
        return Err(Error::EmptyEigenspace { lambda: lambda.to_string() });
    }
    Ok(basis)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharpolyCost {
    pub n: usize,
    /// n!, the number of signed products in the expansion.
    pub permutation_terms: u64,
    #[serde(with = "seconds")]
    pub wallclock: Duration,
}

mod seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

pub fn random_integer_matrix(n: usize, lo: i64, hi: i64, seed: u64) -> Matrix<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n).map(|_| Rational::from_integer(rng.random_range(lo..=hi))).collect();
    Matrix::new(n, n, data).expect("n >= 1")
}

/// Times the n!-term determinant expansion on a random integer matrix.
pub fn charpoly_cost_demo(n: usize, seed: u64) -> Result<CharpolyCost> {
    if n > PERMUTATION_ORACLE_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: PERMUTATION_ORACLE_MAX_N });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let a = random_integer_matrix(n, -9, 9, seed);
    let start = Instant::now();
    det_permutation_oracle(&a)?;
    let wallclock = start.elapsed();
    Ok(CharpolyCost { n, permutation_terms: (1..=n as u64).product(), wallclock })
}

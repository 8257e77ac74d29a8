//! Matrix-first linear algebra: every classical question (independence,
//! spanning, bases, determinants, eigenvalues) answered by an executable
//! matrix procedure that records its steps.

pub mod basis;
pub mod bench;
pub mod cli;
pub mod compute;
pub mod echelon;
pub mod eigen;
pub mod error;
pub mod factor;
pub mod matrix;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::{AnyMatrix, Matrix, Vector};
pub use poly::Polynomial;
pub use scalar::{ComplexF, Domain, Rational, Scalar};

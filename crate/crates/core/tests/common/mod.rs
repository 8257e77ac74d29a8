#![allow(dead_code)]

use matrixfirst::{Matrix, Rational};
use proptest::prelude::*;
use rand::Rng;

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p, d).unwrap()
}

/// Integers in [-5, 5], with a small share of fractions p/2 and p/3.
pub fn entry() -> impl Strategy<Value = Rational> + Clone {
    prop_oneof![
        4 => (-5i64..=5).prop_map(Rational::from),
        1 => (-5i64..=5, 2i64..=3).prop_map(|(p, d)| q(p, d)),
    ]
}

pub fn int_entry() -> impl Strategy<Value = Rational> + Clone {
    (-5i64..=5).prop_map(Rational::from)
}

pub fn matrix_of(rows: usize, cols: usize, e: impl Strategy<Value = Rational> + Clone) -> impl Strategy<Value = Matrix<Rational>> {
    proptest::collection::vec(e, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
}

pub fn rational_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| matrix_of(r, c, entry()))
}

pub fn square_matrix(max_n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (1..=max_n).prop_flat_map(|n| matrix_of(n, n, entry()))
}

pub fn square_int_matrix(max_n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (1..=max_n).prop_flat_map(|n| matrix_of(n, n, int_entry()))
}

pub fn float_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
}

pub fn rng_rational_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix<Rational> {
    let data = (0..rows * cols)
        .map(|_| {
            if rng.random_ratio(1, 5) {
                q(rng.random_range(lo..=hi), rng.random_range(2..=3))
            } else {
                Rational::from(rng.random_range(lo..=hi))
            }
        })
        .collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn rng_int_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix<Rational> {
    let data = (0..rows * cols).map(|_| Rational::from(rng.random_range(lo..=hi))).collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn rng_float_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Unit lower times unit upper triangular: always invertible, det 1.
pub fn rng_unimodular(rng: &mut impl Rng, n: usize) -> Matrix<Rational> {
    let mut l = Matrix::<Rational>::identity(n);
    let mut u = Matrix::<Rational>::identity(n);
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = Rational::from(rng.random_range(-2..=2));
            u[(j, i)] = Rational::from(rng.random_range(-2..=2));
        }
    }
    l.matmul(&u).unwrap()
}

//! One-shot computations on a matrix plus arguments, returning JSON. Shared by
//! the CLI, the HTTP API and the C ABI so all three emit identical records.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::{change_of_basis, invert_traced, BasisSet};
use crate::echelon::{basis_check, ref_with, rref_with, solve_with, EchelonOptions, PivotStrategy};
use crate::eigen::{francis_qr_eigenvalues, krylov_annihilator, minimal_polynomial_certified};
use crate::error::{Error, Result};
use crate::factor::{det_permutation_oracle, gs_compare, householder_qr, least_squares, lu, LuPivoting};
use crate::matrix::io::vector_from_value;
use crate::matrix::{AnyMatrix, Matrix};
use crate::poly::Polynomial;
use crate::scalar::{ComplexF, Domain, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputeOp {
    Ref,
    Rref,
    Solve,
    Inv,
    Lu,
    Det,
    Qr,
    Lstsq,
    Minpoly,
    Eig,
    Krylov,
    BasisCheck,
    ChangeBasis,
    GsCompare,
}

impl ComputeOp {
    pub const ALL: [ComputeOp; 14] = [
        ComputeOp::Ref,
        ComputeOp::Rref,
        ComputeOp::Solve,
        ComputeOp::Inv,
        ComputeOp::Lu,
        ComputeOp::Det,
        ComputeOp::Qr,
        ComputeOp::Lstsq,
        ComputeOp::Minpoly,
        ComputeOp::Eig,
        ComputeOp::Krylov,
        ComputeOp::BasisCheck,
        ComputeOp::ChangeBasis,
        ComputeOp::GsCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComputeOp::Ref => "ref",
            ComputeOp::Rref => "rref",
            ComputeOp::Solve => "solve",
            ComputeOp::Inv => "inv",
            ComputeOp::Lu => "lu",
            ComputeOp::Det => "det",
            ComputeOp::Qr => "qr",
            ComputeOp::Lstsq => "lstsq",
            ComputeOp::Minpoly => "minpoly",
            ComputeOp::Eig => "eig",
            ComputeOp::Krylov => "krylov",
            ComputeOp::BasisCheck => "basis-check",
            ComputeOp::ChangeBasis => "change-basis",
            ComputeOp::GsCompare => "gs-compare",
        }
    }
}

impl FromStr for ComputeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComputeOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown computation {s:?}")))
    }
}

/// Optional knobs; each computation reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComputeArgs {
    pub domain: Option<Domain>,
    pub strategy: Option<PivotStrategy>,
    pub pivoting: Option<LuPivoting>,
    /// Relative pivot threshold for floats.
    pub tol: Option<f64>,
    /// Right-hand side or starting vector.
    pub b: Option<Value>,
    /// Second matrix, e.g. the basis for `change-basis`.
    pub basis: Option<Value>,
    /// Expected dimension for `basis-check`.
    pub dim: Option<usize>,
    pub max_sweeps: Option<usize>,
    pub trace: bool,
}

impl ComputeArgs {
    fn echelon_options<T: Scalar>(&self) -> Result<EchelonOptions> {
        let mut opts = EchelonOptions::default_for::<T>();
        if let Some(s) = self.strategy {
            opts.strategy = s;
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
            }
            opts.rel_tol = tol;
        }
        Ok(opts)
    }

    fn vector<T: Scalar>(&self, name: &str) -> Result<Vec<T>> {
        let v = self.b.as_ref().ok_or_else(|| Error::InvalidArgument(format!("{name} needs a vector \"b\"")))?;
        vector_from_value(v)
    }
}

/// JSON request body of `POST /v1/compute/{op}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComputeRequest {
    pub matrix: Value,
    #[serde(default)]
    pub args: ComputeArgs,
}

pub fn compute_request(op: ComputeOp, req: &ComputeRequest) -> Result<Value> {
    let domain = req.args.domain.unwrap_or(Domain::Rational);
    let m = AnyMatrix::from_value(&req.matrix, domain)?;
    compute(op, &m, &req.args)
}

pub fn compute(op: ComputeOp, m: &AnyMatrix, args: &ComputeArgs) -> Result<Value> {
    macro_rules! generic {
        ($f:ident) => {
            match m {
                AnyMatrix::Rational(a) => $f(a, args),
                AnyMatrix::Float(a) => $f(a, args),
            }
        };
    }
    match op {
        ComputeOp::Ref => generic!(ref_json),
        ComputeOp::Rref => generic!(rref_json),
        ComputeOp::Solve => generic!(solve_json),
        ComputeOp::Inv => generic!(inv_json),
        ComputeOp::Lu => generic!(lu_json),
        ComputeOp::Det => generic!(det_json),
        ComputeOp::BasisCheck => generic!(basis_check_json),
        ComputeOp::ChangeBasis => generic!(change_basis_json),
        ComputeOp::Qr => to_json(householder_qr(&m.to_f64())?),
        ComputeOp::Lstsq => {
            let b: Vec<f64> = args.vector("lstsq")?;
            to_json(least_squares(&m.to_f64(), &b)?)
        }
        ComputeOp::GsCompare => to_json(gs_compare(&m.to_f64())?),
        ComputeOp::Minpoly => to_json(minimal_polynomial_certified(m.as_rational()?)?),
        ComputeOp::Krylov => {
            let b = args.vector("krylov")?;
            to_json(krylov_annihilator(m.as_rational()?, &b)?)
        }
        ComputeOp::Eig => to_json(eig_report(m, args.max_sweeps)?),
    }
}

fn to_json<S: Serialize>(x: S) -> Result<Value> {
    Ok(serde_json::to_value(x).expect("result records serialize"))
}

fn ref_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let res = ref_with(a, &args.echelon_options::<T>()?);
    let mut v = to_json(&res)?;
    strip_trace(&mut v, args);
    v.as_object_mut().expect("object").remove("rref");
    Ok(v)
}

fn rref_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let res = rref_with(a, &args.echelon_options::<T>()?);
    let mut v = to_json(&res)?;
    strip_trace(&mut v, args);
    Ok(v)
}

fn strip_trace(v: &mut Value, args: &ComputeArgs) {
    if !args.trace {
        v.as_object_mut().expect("object").remove("trace");
    }
}

fn solve_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let b: Vec<T> = args.vector("solve")?;
    to_json(solve_with(a, &b, &args.echelon_options::<T>()?)?)
}

fn inv_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let inv = invert_traced(a, &args.echelon_options::<T>()?)?;
    let mut v = to_json(&inv)?;
    strip_trace(&mut v, args);
    Ok(v)
}

fn lu_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let f = lu(a, args.pivoting.unwrap_or_else(LuPivoting::default_for::<T>))?;
    let mut v = to_json(&f)?;
    if args.trace {
        v["trace"] = to_json(&f.trace)?;
    }
    Ok(v)
}

fn det_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let f = lu(a, args.pivoting.unwrap_or_else(LuPivoting::default_for::<T>))?;
    let mut v = json!({ "det": to_json(f.det())?, "ex": f.exchange_count });
    if a.rows() <= 6 {
        v["permutation_sum"] = to_json(det_permutation_oracle(a)?)?;
    }
    Ok(v)
}

fn basis_check_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let dim = args.dim.unwrap_or(a.rows());
    to_json(basis_check(&a.columns(), dim)?)
}

fn change_basis_json<T: Scalar + Serialize>(a: &Matrix<T>, args: &ComputeArgs) -> Result<Value> {
    let u = args.basis.as_ref().ok_or_else(|| Error::InvalidArgument("change-basis needs \"basis\"".into()))?;
    let u: Matrix<T> = crate::matrix::io::matrix_from_value(u)?;
    let basis = BasisSet::from_matrix(&u)?;
    to_json(json!({ "A_U": to_json(change_of_basis(a, &basis)?)? }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigEntry {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

/// Output of `eig`: numeric eigenvalues from Francis QR, checked against
/// the exact minimal polynomial when the input is rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub eigenvalues: Vec<EigEntry>,
    /// `‖Av - λv‖ / ‖A‖_F` per eigenvalue.
    pub residuals: Vec<f64>,
    pub eigenvectors: Vec<Option<Vec<f64>>>,
    pub minpoly: Option<Polynomial>,
    /// `|p(λ)| / (1 + |λ|)^deg` per eigenvalue, with `p` the minimal polynomial.
    pub minpoly_residuals: Option<Vec<f64>>,
    pub iterations: usize,
}

pub fn eig_report(m: &AnyMatrix, max_sweeps: Option<usize>) -> Result<EigReport> {
    let res = francis_qr_eigenvalues(&m.to_f64(), max_sweeps)?;
    let minpoly = match m {
        AnyMatrix::Rational(a) => Some(minimal_polynomial_certified(a)?.minpoly),
        AnyMatrix::Float(_) => None,
    };
    let values: Vec<ComplexF> = res.eigenvalues.iter().map(|e| e.value).collect();
    let minpoly_residuals = minpoly.as_ref().map(|p| {
        let deg = p.degree().unwrap_or(0) as i32;
        values.iter().map(|&z| p.eval_complex(z).norm() / (1.0 + z.norm()).powi(deg)).collect()
    });
    Ok(EigReport {
        eigenvalues: res.eigenvalues.iter().map(|e| EigEntry { re: e.value.re, im: e.value.im, mult: e.mult }).collect(),
        residuals: res.residuals,
        eigenvectors: res.eigenvectors,
        minpoly,
        minpoly_residuals,
        iterations: res.iterations_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(matrix: Value, args: Value) -> ComputeRequest {
        serde_json::from_value(json!({ "matrix": matrix, "args": args })).unwrap()
    }

    #[test]
    fn op_names_round_trip() {
        for op in ComputeOp::ALL {
            assert_eq!(op.name().parse::<ComputeOp>().unwrap(), op);
        }
        assert!("nope".parse::<ComputeOp>().is_err());
    }

    #[test]
    fn ref_on_identity() {
        let v = compute_request(ComputeOp::Ref, &req(json!([[1, 0], [0, 1]]), json!({}))).unwrap();
        assert_eq!(v["pivots"], json!([[0, 0], [1, 1]]));
        assert!(v.get("trace").is_none());
        let v = compute_request(ComputeOp::Ref, &req(json!([[0, 1], [1, 0]]), json!({"trace": true}))).unwrap();
        assert_eq!(v["trace"]["steps"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn solve_and_det() {
        let v = compute_request(ComputeOp::Solve, &req(json!([[2, 0], [0, 4]]), json!({"b": [1, 1]}))).unwrap();
        assert_eq!(v, json!({"kind": "Unique", "x": ["1/2", "1/4"]}));
        let v = compute_request(ComputeOp::Det, &req(json!([[1, 2], [3, 4]]), json!({}))).unwrap();
        assert_eq!(v["det"], json!("-2"));
        assert_eq!(v["permutation_sum"], json!("-2"));
    }

    #[test]
    fn singular_inverse_is_an_error() {
        let err = compute_request(ComputeOp::Inv, &req(json!([[1, 2], [2, 4]]), json!({}))).unwrap_err();
        assert_eq!(err, Error::Singular { rank: 1, free_cols: vec![1] });
    }

    #[test]
    fn float_domain_and_tolerance() {
        let r = req(json!([[0.5, 1], [1, 2]]), json!({"domain": "float", "tol": 1e-9}));
        let v = compute_request(ComputeOp::Rref, &r).unwrap();
        assert_eq!(v["rank"], 1);
        let bad = req(json!([[1]]), json!({"domain": "float", "tol": -1.0}));
        assert!(matches!(compute_request(ComputeOp::Ref, &bad), Err(Error::InvalidArgument(_))));
        assert!(matches!(compute_request(ComputeOp::Ref, &req(json!([[0.5]]), json!({}))), Err(Error::Parse(_))));
    }

    #[test]
    fn eig_report_round_trips() {
        let m = AnyMatrix::Rational(Matrix::from_i64_rows(&[&[2, 1], &[1, 2]]).unwrap());
        let r = eig_report(&m, None).unwrap();
        assert_eq!(r.minpoly.as_ref().unwrap().to_string(), "x^2 - 4x + 3");
        assert!((r.eigenvalues[0].re - 3.0).abs() < 1e-12 && (r.eigenvalues[1].re - 1.0).abs() < 1e-12);
        assert!(r.residuals.iter().all(|&x| x < 1e-9));
        assert!(r.minpoly_residuals.as_ref().unwrap().iter().all(|&x| x < 1e-9));
        let back: EigReport = serde_json::from_value(serde_json::to_value(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn change_basis_and_basis_check() {
        let v = compute_request(
            ComputeOp::ChangeBasis,
            &req(json!([[2, 0], [0, 3]]), json!({"basis": [[0, 1], [1, 0]]})),
        )
        .unwrap();
        assert_eq!(v["A_U"]["data"], json!([["3", "0"], ["0", "2"]]));
        let v = compute_request(ComputeOp::BasisCheck, &req(json!([[1, 1], [0, 1]]), json!({}))).unwrap();
        assert_eq!(v["is_basis"], true);
    }
}

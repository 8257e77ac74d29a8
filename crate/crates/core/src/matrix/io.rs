//! Matrix text formats: CSV rows of tokens, and JSON
//! `{"rows": r, "cols": c, "data": [[...], ...]}` with string or number entries.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Domain, Rational, Scalar};

/// Parses CSV text. Blank lines and lines starting with `#` are skipped.
pub fn parse_csv<T: Scalar>(text: &str) -> Result<Matrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(T::parse_token)
            .collect::<Result<Vec<T>>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", line + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows found".into()));
    }
    Matrix::from_rows(rows)
}

pub fn parse_json<T: Scalar>(text: &str) -> Result<Matrix<T>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("json: {e}")))?;
    matrix_from_value(&value)
}

/// JSON when the text starts with `{` or `[`, CSV otherwise.
pub fn parse_matrix_text<T: Scalar>(text: &str) -> Result<Matrix<T>> {
    match text.trim_start().chars().next() {
        Some('{') | Some('[') => parse_json(text),
        _ => parse_csv(text),
    }
}

fn scalar_from_value<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        Value::String(s) => T::parse_token(s),
        Value::Number(n) => T::parse_token(&n.to_string()),
        other => Err(Error::Parse(format!("matrix entry must be a string or number, got {other}"))),
    }
}

pub(crate) fn vector_from_value<T: Scalar>(v: &Value) -> Result<Vec<T>> {
    match v {
        Value::Array(items) => items.iter().map(scalar_from_value).collect(),
        other => Err(Error::Parse(format!("expected an array of entries, got {other}"))),
    }
}

/// Accepts the object form or a bare array of rows.
pub(crate) fn matrix_from_value<T: Scalar>(v: &Value) -> Result<Matrix<T>> {
    let (data, rows, cols) = match v {
        Value::Object(obj) => {
            let data = obj.get("data").ok_or_else(|| Error::Parse("missing \"data\"".into()))?;
            let dim = |key: &str| -> Result<Option<usize>> {
                match obj.get(key) {
                    None => Ok(None),
                    Some(x) => x
                        .as_u64()
                        .map(|n| Some(n as usize))
                        .ok_or_else(|| Error::Parse(format!("\"{key}\" must be a nonnegative integer"))),
                }
            };
            (data, dim("rows")?, dim("cols")?)
        }
        Value::Array(_) => (v, None, None),
        other => return Err(Error::Parse(format!("expected a matrix object, got {other}"))),
    };
    let Value::Array(row_values) = data else {
        return Err(Error::Parse("\"data\" must be an array of rows".into()));
    };
    let parsed = row_values.iter().map(vector_from_value).collect::<Result<Vec<Vec<T>>>>()?;
    let m = Matrix::from_rows(parsed)?;
    if rows.is_some_and(|r| r != m.rows()) || cols.is_some_and(|c| c != m.cols()) {
        return Err(Error::ShapeMismatch(format!(
            "declared {}x{} but data is {}x{}",
            rows.unwrap_or(m.rows()),
            cols.unwrap_or(m.cols()),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

/// A matrix whose domain is only known at run time (CLI, HTTP, C ABI).
/// Mixed-domain operations are rejected, never promoted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyMatrix {
    Rational(Matrix<Rational>),
    Float(Matrix<f64>),
}

impl AnyMatrix {
    pub fn parse(text: &str, domain: Domain) -> Result<Self> {
        Ok(match domain {
            Domain::Rational => AnyMatrix::Rational(parse_matrix_text(text)?),
            Domain::Float => AnyMatrix::Float(parse_matrix_text(text)?),
        })
    }

    pub fn from_value(v: &Value, domain: Domain) -> Result<Self> {
        Ok(match domain {
            Domain::Rational => AnyMatrix::Rational(matrix_from_value(v)?),
            Domain::Float => AnyMatrix::Float(matrix_from_value(v)?),
        })
    }

    pub fn domain(&self) -> Domain {
        match self {
            AnyMatrix::Rational(_) => Domain::Rational,
            AnyMatrix::Float(_) => Domain::Float,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Rational(m) => m.shape(),
            AnyMatrix::Float(m) => m.shape(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            AnyMatrix::Rational(m) => m.to_f64(),
            AnyMatrix::Float(m) => m.clone(),
        }
    }

    pub fn as_rational(&self) -> Result<&Matrix<Rational>> {
        match self {
            AnyMatrix::Rational(m) => Ok(m),
            AnyMatrix::Float(_) => {
                Err(Error::DomainMismatch { expected: Domain::Rational, found: Domain::Float })
            }
        }
    }

    pub fn matmul(&self, other: &AnyMatrix) -> Result<AnyMatrix> {
        match (self, other) {
            (AnyMatrix::Rational(a), AnyMatrix::Rational(b)) => a.matmul(b).map(AnyMatrix::Rational),
            (AnyMatrix::Float(a), AnyMatrix::Float(b)) => a.matmul(b).map(AnyMatrix::Float),
            _ => Err(Error::DomainMismatch { expected: self.domain(), found: other.domain() }),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("matrix serialization is infallible")
    }
}

impl From<Matrix<Rational>> for AnyMatrix {
    fn from(m: Matrix<Rational>) -> Self {
        AnyMatrix::Rational(m)
    }
}

impl From<Matrix<f64>> for AnyMatrix {
    fn from(m: Matrix<f64>) -> Self {
        AnyMatrix::Float(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rational_tokens() {
        let m: Matrix<Rational> = parse_csv("# comment\n1, -3/4\n\n2/6,5\n").unwrap();
        assert_eq!(m.to_rows()[0][1].to_string(), "-3/4");
        assert_eq!(m.to_rows()[1][0].to_string(), "1/3");
    }

    #[test]
    fn csv_rejects_floats_in_exact_mode() {
        let err = parse_csv::<Rational>("1, 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let m: Matrix<f64> = parse_csv("1, 0.5\n1/4, 2").unwrap();
        assert_eq!(m[(1, 0)], 0.25);
    }

    #[test]
    fn csv_ragged_rows_fail() {
        assert!(matches!(parse_csv::<Rational>("1,2\n3\n"), Err(Error::ShapeMismatch(_))));
        assert!(parse_csv::<Rational>("\n# nothing\n").is_err());
    }

    #[test]
    fn json_forms() {
        let m: Matrix<Rational> =
            parse_json(r#"{"rows":2,"cols":2,"data":[["2/3",1],[0,"-5"]]}"#).unwrap();
        assert_eq!(m[(0, 0)].to_string(), "2/3");
        let bare: Matrix<Rational> = parse_json("[[1,2],[3,4]]").unwrap();
        assert_eq!(bare.shape(), (2, 2));
        assert!(parse_json::<Rational>(r#"{"rows":3,"cols":2,"data":[[1,2],[3,4]]}"#).is_err());
        assert!(parse_json::<Rational>(r#"{"data":[[0.5]]}"#).is_err());
        let f: Matrix<f64> = parse_json(r#"{"data":[[0.5, "1/2"]]}"#).unwrap();
        assert_eq!(f.data(), &[0.5, 0.5]);
    }

    #[test]
    fn serialization_shapes() {
        let m = Matrix::from_i64_rows(&[&[1, 2]]).unwrap().scale(&Rational::new(1, 3).unwrap());
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v, serde_json::json!({"rows":1,"cols":2,"data":[["1/3","2/3"]]}));
        let back: Matrix<Rational> = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn mixed_domains_are_rejected() {
        let a = AnyMatrix::Rational(Matrix::identity(2));
        let b = AnyMatrix::Float(Matrix::identity(2));
        assert!(matches!(a.matmul(&b), Err(Error::DomainMismatch { .. })));
        assert!(a.matmul(&a).is_ok());
    }
}

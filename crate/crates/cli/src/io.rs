//! JSON encoding of matrices and vectors.
//!
//! A matrix is `{"dim": n, "cols": k, "data": [[[re, im], ...], ...]}` with
//! one inner list per row; `cols` may be omitted for square matrices and
//! entries may be plain numbers when real. A fundamental symmetry may also
//! be given as `{"signature": [1, -1, ...]}`. A vector is
//! `{"dim": n, "data": [[re, im], ...]}`.
//!
//! Numbers are written in shortest round-trip form, so reading a written
//! file reproduces every entry bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use krein::linalg::{CMat, CVec};

use crate::error::CliError;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(&self) -> Complex64 {
        match *self {
            Entry::Complex([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseMatrix {
    dim: usize,
    #[serde(default)]
    cols: Option<usize>,
    data: Vec<Vec<Entry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureMatrix {
    signature: Vec<i32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseVector {
    dim: usize,
    data: Vec<Entry>,
}

#[derive(Serialize)]
struct MatrixOut<'a> {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    data: &'a [Vec<[f64; 2]>],
}

/// Parses JSON text, reporting the position of syntax errors.
pub fn parse_json(text: &str, path: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::malformed(path, &e))
}

fn shape_error(path: &str, message: String) -> CliError {
    CliError::validation("invalid_matrix", message).with_path(path)
}

pub fn matrix_from_value(value: &Value, path: &str) -> Result<CMat, CliError> {
    if value.get("signature").is_some() {
        let sig: SignatureMatrix = serde_json::from_value(value.clone())
            .map_err(|e| shape_error(path, e.to_string()))?;
        let n = sig.signature.len();
        return Ok(CMat::from_fn(n, n, |i, k| {
            if i == k {
                Complex64::new(f64::from(sig.signature[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
    }
    let dense: DenseMatrix =
        serde_json::from_value(value.clone()).map_err(|e| shape_error(path, e.to_string()))?;
    let cols = dense.cols.unwrap_or(dense.dim);
    if dense.data.len() != dense.dim {
        return Err(shape_error(
            path,
            format!("expected {} rows, found {}", dense.dim, dense.data.len()),
        ));
    }
    if let Some((i, row)) = dense.data.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(shape_error(
            path,
            format!("row {i} has {} entries, expected {cols}", row.len()),
        ));
    }
    Ok(CMat::from_fn(dense.dim, cols, |i, k| dense.data[i][k].value()))
}

pub fn vector_from_value(value: &Value, path: &str) -> Result<CVec, CliError> {
    let dense: DenseVector =
        serde_json::from_value(value.clone()).map_err(|e| shape_error(path, e.to_string()))?;
    if dense.data.len() != dense.dim {
        return Err(shape_error(
            path,
            format!("expected {} entries, found {}", dense.dim, dense.data.len()),
        ));
    }
    Ok(CVec::from_iterator(dense.dim, dense.data.iter().map(Entry::value)))
}

/// A list of complex numbers, each `[re, im]` or a plain real number.
pub fn complex_values(value: &Value, path: &str) -> Result<Vec<Complex64>, CliError> {
    let entries: Vec<Entry> =
        serde_json::from_value(value.clone()).map_err(|e| shape_error(path, e.to_string()))?;
    Ok(entries.iter().map(Entry::value).collect())
}

pub fn matrix_to_value(m: &CMat) -> Value {
    let data: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| [m[(i, k)].re, m[(i, k)].im]).collect())
        .collect();
    let out = MatrixOut {
        dim: m.nrows(),
        cols: (m.ncols() != m.nrows()).then_some(m.ncols()),
        data: &data,
    };
    serde_json::to_value(out).expect("finite matrices serialize")
}

pub fn complex_list(values: &[Complex64]) -> Value {
    Value::from(values.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>())
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

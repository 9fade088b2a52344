//! JSON encodings shared by every exported type.
//!
//! Complex numbers are two-element arrays `[re, im]` (a bare number is read as
//! a real value). Matrices are row-major nested arrays. Floats are written in
//! shortest round-trip form and parsed with exact round-tripping enabled.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub C);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Real(f64),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Cx(C::new(re, im)),
            Repr::Real(re) => Cx(C::new(re, 0.0)),
        })
    }
}

impl From<C> for Cx {
    fn from(c: C) -> Self {
        Cx(c)
    }
}

pub fn cx_vec(values: &[C]) -> Vec<Cx> {
    values.iter().copied().map(Cx).collect()
}

pub fn from_cx_vec(values: &[Cx]) -> Vec<C> {
    values.iter().map(|c| c.0).collect()
}

pub fn vector_json(v: &CVector) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

pub fn vector_from_json(v: &[Cx]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|c| c.0))
}

/// Row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<Cx>>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Cx(m[(i, j)])).collect()).collect())
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let rows = json.0.len();
        let cols = json.0.first().map_or(0, Vec::len);
        if let Some(bad) = json.0.iter().find(|r| r.len() != cols) {
            return Err(Error::InvalidInput(format!("ragged matrix: row of length {} in a matrix with {} columns", bad.len(), cols)));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| json.0[i][j].0))
    }
}

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    MatrixJson::from(m)
}

pub fn square_matrix_from_json(json: MatrixJson) -> Result<CMatrix> {
    let m = CMatrix::try_from(json)?;
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("exported types always serialize")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn read_matrix(text: &str) -> Result<CMatrix> {
    square_matrix_from_json(from_json(text)?)
}

pub fn write_matrix(m: &CMatrix) -> String {
    to_json(&matrix_json(m))
}

//! JSON exchange format: `{"dims":[..],"matrix":[[[re,im],..],..]}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::linalg::{CMatrix, C64};
use super::operator::{DensityOperator, HermitianOperator, Operator};
use crate::config::Tolerances;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_operator(op: &impl Operator) -> Self {
        let m = op.matrix();
        MatrixJson {
            dims: op.dims().to_vec(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.matrix.len();
        if self.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::dim("matrix rows must all have the same length as the row count"));
        }
        if self.matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::arg("matrix entries must be finite"));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| C64::new(self.matrix[i][j][0], self.matrix[i][j][1])))
    }

    pub fn to_density(&self, tol: &Tolerances) -> Result<DensityOperator> {
        DensityOperator::new_with(self.dims.clone(), self.to_matrix()?, tol)
    }

    pub fn to_hermitian(&self, tol: &Tolerances) -> Result<HermitianOperator> {
        HermitianOperator::new_with(self.dims.clone(), self.to_matrix()?, tol)
    }
}

pub fn state_from_str(s: &str, tol: &Tolerances) -> Result<DensityOperator> {
    serde_json::from_str::<MatrixJson>(s)?.to_density(tol)
}

pub fn state_from_value(v: &Value, tol: &Tolerances) -> Result<DensityOperator> {
    MatrixJson::deserialize(v)?.to_density(tol)
}

pub fn hermitian_from_value(v: &Value, tol: &Tolerances) -> Result<HermitianOperator> {
    MatrixJson::deserialize(v)?.to_hermitian(tol)
}

pub fn read_state(path: &std::path::Path, tol: &Tolerances) -> Result<DensityOperator> {
    state_from_str(&std::fs::read_to_string(path)?, tol)
}

pub fn to_value(op: &impl Operator) -> Value {
    serde_json::to_value(MatrixJson::from_operator(op)).expect("plain numeric data serializes")
}

pub fn to_string(op: &impl Operator) -> String {
    serde_json::to_string(&MatrixJson::from_operator(op)).expect("plain numeric data serializes")
}

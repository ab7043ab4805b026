//! `{"dim": D, "matrix": [[[re, im], ...], ...]}`, row-major.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{CMatrix, DensityOperator};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major complex matrix as `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dim: usize,
    pub matrix: MatrixJson,
}

pub(crate) fn matrix_to_json<T: Real>(m: &CMatrix<T>) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

/// Rejects ragged or non-square input.
pub(crate) fn matrix_from_json<T: Real>(rows: &MatrixJson) -> Result<CMatrix<T>> {
    let n = rows.len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Malformed(format!(
            "matrix is not square: row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("matrix has non-finite entries".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex::new(T::lit(rows[i][j][0]), T::lit(rows[i][j][1]))
    }))
}

impl StateJson {
    pub fn from_state<T: Real>(rho: &DensityOperator<T>) -> Self {
        Self {
            dim: rho.dim(),
            matrix: matrix_to_json(rho.matrix()),
        }
    }

    /// Validates shape and every density-operator invariant.
    pub fn to_state<T: Real>(&self) -> Result<DensityOperator<T>> {
        let m = matrix_from_json::<T>(&self.matrix)?;
        if m.nrows() != self.dim {
            return Err(Error::Malformed(format!(
                "declared dim {} but matrix is {}x{}",
                self.dim,
                m.nrows(),
                m.nrows()
            )));
        }
        DensityOperator::new(m)
    }
}

impl<T: Real> DensityOperator<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateJson::from_state(self)).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<StateJson>(s)?.to_state()
    }
}

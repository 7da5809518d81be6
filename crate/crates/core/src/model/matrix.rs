use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                field: "matrix".into(),
                expected: format!("{rows}x{cols} with rows, cols >= 1"),
                found: format!("{} entries", entries.len()),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::ShapeMismatch {
                field: "matrix".into(),
                expected: "at least 1x1".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                field: "matrix".into(),
            });
        }
        Ok(Self(m))
    }

    /// Real matrix from rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch {
                field: "matrix rows".into(),
                expected: format!("{c} columns in every row"),
                found: "ragged rows".into(),
            });
        }
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::new(r, c, entries)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    /// Largest |A_ij - conj(A_ji)|, or infinity for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.0)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn frobenius_distance(&self, other: &ComplexMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

impl From<ComplexMatrix> for DMatrix<Complex64> {
    fn from(m: ComplexMatrix) -> Self {
        m.0
    }
}

pub(crate) fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Serialized form of a complex matrix: rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson(
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| {
                            let z = m.get(i, j);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson::from(&m)
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        ComplexMatrix::try_from(&value)
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(value: &MatrixJson) -> Result<Self> {
        let rows = value.0.len();
        let cols = value.0.first().map_or(0, Vec::len);
        if value.0.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch {
                field: "matrix".into(),
                expected: format!("{cols} columns in every row"),
                found: "ragged rows".into(),
            });
        }
        let entries = value
            .0
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(rows, cols, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_entry_count() {
        let err = ComplexMatrix::new(2, 2, vec![Complex64::new(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn rejects_nan() {
        let err = ComplexMatrix::new(1, 1, vec![Complex64::new(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn row_major_order() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(m.get(0, 1), Complex64::new(2.0, 0.0));
        assert_eq!(m.get(1, 0), Complex64::new(3.0, 0.0));
        let back: Vec<f64> = m.to_row_major().iter().map(|z| z.re).collect();
        assert_eq!(back, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::new(
            1,
            2,
            vec![Complex64::new(0.1, -0.3), Complex64::new(1e-300, 7.25)],
        )
        .unwrap();
        let j = MatrixJson::from(&m);
        assert_eq!(ComplexMatrix::try_from(&j).unwrap(), m);
    }
}

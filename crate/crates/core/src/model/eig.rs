use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::{hermitian_defect, ComplexMatrix};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition `A = U diag(values) U^H` of a Hermitian matrix.
///
/// Values are sorted descending. Each eigenvector column is scaled so its
/// largest-magnitude component is real and positive.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = self.vectors.as_dmatrix();
        let n = self.values.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        ComplexMatrix::from_dmatrix(u * d * u.adjoint()).expect("finite product")
    }
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    let defect = a.hermitian_defect();
    let scale = 1.0_f64.max(crate::linalg::max_abs(a.as_dmatrix()));
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let (values, vectors) = eig_sorted(a.as_dmatrix());
    Ok(HermitianEig {
        values,
        vectors: ComplexMatrix::from_dmatrix(vectors).expect("finite eigenvectors"),
    })
}

/// Unchecked variant for internal callers that already hold a Hermitian matrix.
pub(crate) fn eig_sorted(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    debug_assert!(hermitian_defect(a) < 1e-6 * (1.0 + a.norm()));
    let n = a.nrows();
    let herm = crate::linalg::hermitize(a);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = Complex64::new(0.0, 0.0);
        for z in col.iter() {
            if z.norm() > pivot.norm() + 1e-12 {
                pivot = *z;
            }
        }
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for r in 0..n {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let e = hermitian_eig(&ComplexMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0]);
        assert!((e.vectors.get(1, 0).re - 1.0).abs() < 1e-15);
        assert!((e.vectors.get(0, 1).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_half_matrix() {
        let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!(e.values[1].abs() < 1e-12);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((e.vectors.get(0, 0).re - s).abs() < 1e-12);
        assert!((e.vectors.get(1, 0).re - s).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            hermitian_eig(&a),
            Err(Error::NotHermitian { .. })
        ));
    }
}

//! Small dense helpers over `DMatrix<Complex64>` shared by the solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMat = DMatrix<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// (A + A^H) / 2
pub(crate) fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub(crate) fn trace_re(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Re tr(AB) without forming the product.
pub(crate) fn trace_prod_re(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Natural-log determinant of a Hermitian positive-definite matrix.
pub(crate) fn ln_det_hpd(a: &CMat) -> Option<f64> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// Inverse of a Hermitian positive-definite matrix, re-hermitized.
pub(crate) fn inv_hpd(a: &CMat) -> Option<CMat> {
    let inv = a.clone().cholesky()?.inverse();
    Some(hermitize(&inv))
}

/// H Q H^H scaled by `s`, hermitized.
pub(crate) fn congruence(h: &CMat, q: &CMat, s: f64) -> CMat {
    hermitize(&(h * q * h.adjoint()).scale(s))
}

pub(crate) fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Largest-to-smallest singular value ratio; infinity for singular input.
pub(crate) fn condition_number(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

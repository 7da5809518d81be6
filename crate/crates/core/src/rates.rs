//! Mutual information and interference-plus-noise covariances.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{congruence, ln_det_hpd, CMat};
use crate::model::{ComplexMatrix, InterferenceSystem, RatePoint, StrategyProfile};

/// Interference-plus-noise covariance seen by one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCovariance(ComplexMatrix);

impl NoiseCovariance {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// `I + sum_{j != i} eta_ij H_ij Q_j H_ij^H`
pub fn interference_plus_noise(
    sys: &InterferenceSystem,
    profile: &StrategyProfile,
    i: usize,
) -> Result<NoiseCovariance> {
    sys.check_user(i)?;
    profile.validate(sys)?;
    let qs: Vec<&CMat> = profile.covariances().iter().map(|q| q.dm()).collect();
    Ok(NoiseCovariance(
        ComplexMatrix::from_dmatrix(interference_dm(sys, &qs, i)).expect("finite covariance"),
    ))
}

pub(crate) fn interference_dm(sys: &InterferenceSystem, qs: &[&CMat], i: usize) -> CMat {
    let mut r = CMat::identity(sys.nr(), sys.nr());
    for (j, q) in qs.iter().enumerate() {
        if j != i && sys.eta(i, j) != 0.0 {
            r += congruence(sys.hm(i, j), q, sys.eta(i, j));
        }
    }
    r
}

/// Rate of user `i` in bits, computed as `(ln det(R + S) - ln det R) / ln 2`.
pub(crate) fn rate_dm(sys: &InterferenceSystem, qs: &[&CMat], i: usize) -> Result<f64> {
    let r = interference_dm(sys, qs, i);
    let s = congruence(sys.hm(i, i), qs[i], sys.rho(i));
    rate_from_parts(&r, &s)
}

pub(crate) fn rate_from_parts(r: &CMat, s: &CMat) -> Result<f64> {
    let ld_r = ln_det_hpd(r).ok_or(Error::SingularNoiseCovariance)?;
    let ld_rs = ln_det_hpd(&(r + s)).ok_or(Error::SingularNoiseCovariance)?;
    Ok(((ld_rs - ld_r) / LN_2).max(0.0))
}

pub(crate) fn rates_dm(sys: &InterferenceSystem, qs: &[&CMat]) -> Result<Vec<f64>> {
    (0..sys.users()).map(|i| rate_dm(sys, qs, i)).collect()
}

pub(crate) fn profile_refs(profile: &StrategyProfile) -> Vec<&CMat> {
    profile.covariances().iter().map(|q| q.dm()).collect()
}

/// `log2 det(I + rho_i H_ii Q_i H_ii^H R_{-i}^{-1})`, clamped at zero.
pub fn mutual_information(
    sys: &InterferenceSystem,
    profile: &StrategyProfile,
    i: usize,
) -> Result<f64> {
    sys.check_user(i)?;
    profile.validate(sys)?;
    rate_dm(sys, &profile_refs(profile), i)
}

pub fn rate_vector(sys: &InterferenceSystem, profile: &StrategyProfile) -> Result<RatePoint> {
    profile.validate(sys)?;
    Ok(RatePoint::from_vec_unchecked(rates_dm(
        sys,
        &profile_refs(profile),
    )?))
}

/// Rate of user `i` with no interference and covariance `q`.
pub(crate) fn single_user_rate(sys: &InterferenceSystem, q: &CMat, i: usize) -> f64 {
    let r = CMat::identity(sys.nr(), sys.nr());
    let s = congruence(sys.hm(i, i), q, sys.rho(i));
    rate_from_parts(&r, &s).unwrap_or(0.0)
}

fn quad(h: &ComplexMatrix, q: &CMat) -> f64 {
    // h is a 1 x Nt row: h Q h^H
    let n = h.cols();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += h.get(0, a) * q[(a, b)] * h.get(0, b).conj();
        }
    }
    acc.re
}

/// Scalar rate formula for single-antenna receivers (MISO, or SISO when `Nt = 1`).
pub fn specialized_rate_miso_siso(
    sys: &InterferenceSystem,
    profile: &StrategyProfile,
    i: usize,
) -> Result<f64> {
    if sys.nr() != 1 {
        return Err(Error::WrongDimensions {
            required: "Nr = 1 (MISO) or Nt = Nr = 1 (SISO)",
            nt: sys.nt(),
            nr: sys.nr(),
        });
    }
    sys.check_user(i)?;
    profile.validate(sys)?;
    let signal = sys.rho(i) * quad(sys.h(i, i), profile.get(i).dm());
    let mut interference = 0.0;
    for j in 0..sys.users() {
        if j != i {
            interference += sys.eta(i, j) * quad(sys.h(i, j), profile.get(j).dm());
        }
    }
    Ok((1.0 + signal / (1.0 + interference)).log2().max(0.0))
}

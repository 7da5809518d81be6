//! Scenario types: channels, covariances, strategy profiles and rate points.

mod eig;
mod matrix;
mod scenario;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use eig::{hermitian_eig, HermitianEig};
pub(crate) use eig::eig_sorted;
pub use matrix::{ComplexMatrix, MatrixJson};
pub use scenario::{load_scenario, save_scenario, scenario_from_json, scenario_to_json};

use crate::error::{Error, Result};
use crate::linalg::{hermitize, trace_re, CMat};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
/// Slack allowed on `tr(Q_i) <= p_i`.
pub const TRACE_SLACK: f64 = 1e-9;

/// Hermitian positive-semidefinite transmit covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CovarianceMatrix(ComplexMatrix);

impl CovarianceMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::ShapeMismatch {
                field: "covariance".into(),
                expected: "square matrix".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL * (1.0 + crate::linalg::max_abs(m.as_dmatrix())) {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        let (values, _) = eig_sorted(m.as_dmatrix());
        let min = values.last().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self(m))
    }

    /// Hermitizes `m` and clips tiny negative eigenvalues produced by round-off.
    pub(crate) fn from_raw(m: CMat) -> Self {
        let h = hermitize(&m);
        let (values, vectors) = eig_sorted(&h);
        if values.last().copied().unwrap_or(0.0) >= 0.0 {
            return Self(ComplexMatrix::from_dmatrix(h).expect("finite covariance"));
        }
        let n = values.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i].max(0.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let fixed = hermitize(&(&vectors * d * vectors.adjoint()));
        Self(ComplexMatrix::from_dmatrix(fixed).expect("finite covariance"))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(values))
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        Self(ComplexMatrix::from_real_diag(&vec![scale; n]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(self.0.as_dmatrix())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub(crate) fn dm(&self) -> &CMat {
        self.0.as_dmatrix()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    pub fn eig(&self) -> HermitianEig {
        let (values, vectors) = eig_sorted(self.dm());
        HermitianEig {
            values,
            vectors: ComplexMatrix::from_dmatrix(vectors).expect("finite eigenvectors"),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_sorted(self.dm()).0.last().copied().unwrap_or(0.0)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_entry_distance(&self, other: &CovarianceMatrix) -> f64 {
        crate::linalg::max_abs(&(self.dm() - other.dm()))
    }
}

impl TryFrom<MatrixJson> for CovarianceMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        CovarianceMatrix::new(ComplexMatrix::try_from(&value)?)
    }
}

impl From<CovarianceMatrix> for MatrixJson {
    fn from(q: CovarianceMatrix) -> Self {
        MatrixJson::from(&q.0)
    }
}

/// Channels, SNRs, INRs and power budgets of an M-user interference system.
///
/// `h(i, j)` is the `Nr x Nt` channel from transmitter `j` to receiver `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSystem {
    nt: usize,
    nr: usize,
    h: Vec<Vec<ComplexMatrix>>,
    rho: Vec<f64>,
    eta: Vec<Vec<f64>>,
    p: Vec<f64>,
}

impl InterferenceSystem {
    pub fn new(
        nt: usize,
        nr: usize,
        h: Vec<Vec<ComplexMatrix>>,
        rho: Vec<f64>,
        eta: Vec<Vec<f64>>,
        p: Vec<f64>,
    ) -> Result<Self> {
        let sys = Self {
            nt,
            nr,
            h,
            rho,
            eta,
            p,
        };
        validate_system(&sys)?;
        Ok(sys)
    }

    /// Two users with symmetric SNR, INR and unit power budgets.
    pub fn two_user(
        h11: ComplexMatrix,
        h12: ComplexMatrix,
        h21: ComplexMatrix,
        h22: ComplexMatrix,
        snr: f64,
        inr: f64,
    ) -> Result<Self> {
        let nr = h11.rows();
        let nt = h11.cols();
        Self::new(
            nt,
            nr,
            vec![vec![h11, h12], vec![h21, h22]],
            vec![snr, snr],
            vec![vec![0.0, inr], vec![inr, 0.0]],
            vec![1.0, 1.0],
        )
    }

    pub fn users(&self) -> usize {
        self.rho.len()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn h(&self, rx: usize, tx: usize) -> &ComplexMatrix {
        &self.h[rx][tx]
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.eta[i][j]
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rho
    }

    pub fn etas(&self) -> &[Vec<f64>] {
        &self.eta
    }

    pub fn budgets(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn hm(&self, rx: usize, tx: usize) -> &CMat {
        self.h[rx][tx].as_dmatrix()
    }

    /// Same channels with every SNR set to `snr` and every INR to `inr`.
    pub fn with_levels(&self, snr: f64, inr: f64) -> Result<Self> {
        let m = self.users();
        let eta = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { inr }).collect())
            .collect();
        Self::new(
            self.nt,
            self.nr,
            self.h.clone(),
            vec![snr; m],
            eta,
            self.p.clone(),
        )
    }

    /// Same system with all cross gains scaled by `factor`.
    pub fn with_scaled_interference(&self, factor: f64) -> Result<Self> {
        let eta = self
            .eta
            .iter()
            .map(|row| row.iter().map(|e| e * factor).collect())
            .collect();
        Self::new(
            self.nt,
            self.nr,
            self.h.clone(),
            self.rho.clone(),
            eta,
            self.p.clone(),
        )
    }

    pub(crate) fn check_user(&self, i: usize) -> Result<()> {
        if i >= self.users() {
            return Err(Error::IndexOutOfRange {
                index: i,
                users: self.users(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_two_users(&self, what: &str) -> Result<()> {
        if self.users() != 2 {
            return Err(Error::UnsupportedDimension(format!(
                "{what} requires M = 2, got M = {}",
                self.users()
            )));
        }
        Ok(())
    }
}

fn positive(field: String, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { field });
    }
    if value <= 0.0 {
        return Err(Error::NonPositiveParameter {
            field,
            requirement: "> 0",
            value,
        });
    }
    Ok(())
}

/// Checks every structural and numeric invariant of `sys`.
pub fn validate_system(sys: &InterferenceSystem) -> Result<()> {
    let m = sys.rho.len();
    if m == 0 {
        return Err(Error::ShapeMismatch {
            field: "rho".into(),
            expected: "at least one user".into(),
            found: "0 entries".into(),
        });
    }
    if sys.nt == 0 || sys.nr == 0 {
        return Err(Error::ShapeMismatch {
            field: "Nt/Nr".into(),
            expected: ">= 1".into(),
            found: format!("Nt={}, Nr={}", sys.nt, sys.nr),
        });
    }
    if sys.p.len() != m {
        return Err(Error::ShapeMismatch {
            field: "p".into(),
            expected: format!("{m} entries"),
            found: format!("{} entries", sys.p.len()),
        });
    }
    if sys.eta.len() != m || sys.eta.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch {
            field: "eta".into(),
            expected: format!("{m}x{m}"),
            found: "ragged or wrong size".into(),
        });
    }
    if sys.h.len() != m || sys.h.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch {
            field: "H".into(),
            expected: format!("{m}x{m} grid"),
            found: "ragged or wrong size".into(),
        });
    }
    for (i, &r) in sys.rho.iter().enumerate() {
        positive(format!("rho[{i}]"), r)?;
    }
    for (i, &p) in sys.p.iter().enumerate() {
        positive(format!("p[{i}]"), p)?;
    }
    for i in 0..m {
        for j in 0..m {
            let e = sys.eta[i][j];
            let field = format!("eta[{i}][{j}]");
            if !e.is_finite() {
                return Err(Error::NonFinite { field });
            }
            if i != j && e < 0.0 {
                return Err(Error::NonPositiveParameter {
                    field,
                    requirement: ">= 0",
                    value: e,
                });
            }
            let h = &sys.h[i][j];
            if h.rows() != sys.nr || h.cols() != sys.nt {
                return Err(Error::ShapeMismatch {
                    field: format!("H[{i}][{j}]"),
                    expected: format!("{}x{}", sys.nr, sys.nt),
                    found: format!("{}x{}", h.rows(), h.cols()),
                });
            }
        }
    }
    Ok(())
}

/// One covariance per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<CovarianceMatrix>);

impl StrategyProfile {
    pub fn new(sys: &InterferenceSystem, q: Vec<CovarianceMatrix>) -> Result<Self> {
        let profile = Self(q);
        profile.validate(sys)?;
        Ok(profile)
    }

    pub(crate) fn from_vec_unchecked(q: Vec<CovarianceMatrix>) -> Self {
        Self(q)
    }

    pub fn validate(&self, sys: &InterferenceSystem) -> Result<()> {
        if self.0.len() != sys.users() {
            return Err(Error::ShapeMismatch {
                field: "profile".into(),
                expected: format!("{} covariances", sys.users()),
                found: format!("{}", self.0.len()),
            });
        }
        for (i, q) in self.0.iter().enumerate() {
            if q.dim() != sys.nt() {
                return Err(Error::ShapeMismatch {
                    field: format!("Q[{i}]"),
                    expected: format!("{0}x{0}", sys.nt()),
                    found: format!("{0}x{0}", q.dim()),
                });
            }
            let tr = q.trace();
            if tr > sys.p(i) + TRACE_SLACK {
                return Err(Error::PowerBudgetExceeded {
                    user: i,
                    trace: tr,
                    budget: sys.p(i),
                });
            }
        }
        Ok(())
    }

    /// `(p_i / Nt) I` for every user.
    pub fn uniform(sys: &InterferenceSystem) -> Self {
        Self(
            (0..sys.users())
                .map(|i| CovarianceMatrix::scaled_identity(sys.nt(), sys.p(i) / sys.nt() as f64))
                .collect(),
        )
    }

    pub fn zeros(sys: &InterferenceSystem) -> Self {
        Self(
            (0..sys.users())
                .map(|_| CovarianceMatrix::zeros(sys.nt()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &CovarianceMatrix {
        &self.0[i]
    }

    pub fn covariances(&self) -> &[CovarianceMatrix] {
        &self.0
    }

    pub fn with(&self, i: usize, q: CovarianceMatrix) -> Self {
        let mut v = self.0.clone();
        v[i] = q;
        Self(v)
    }

    /// Largest per-user Frobenius distance.
    pub fn max_distance(&self, other: &StrategyProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.matrix().frobenius_distance(b.matrix()))
            .fold(0.0, f64::max)
    }
}

/// Achieved rates in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatePoint(Vec<f64>);

impl RatePoint {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        for (i, r) in rates.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::NonFinite {
                    field: format!("rate[{i}]"),
                });
            }
            if *r < 0.0 {
                return Err(Error::NonPositiveParameter {
                    field: format!("rate[{i}]"),
                    requirement: ">= 0",
                    value: *r,
                });
            }
        }
        Ok(Self(rates))
    }

    pub(crate) fn from_vec_unchecked(rates: Vec<f64>) -> Self {
        Self(rates)
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Component-wise `>= other - tol` with at least one component `> other + tol`.
    pub fn dominates(&self, other: &RatePoint, tol: f64) -> bool {
        let all = self.0.iter().zip(&other.0).all(|(a, b)| *a >= *b - tol);
        let one = self.0.iter().zip(&other.0).any(|(a, b)| *a > *b + tol);
        all && one
    }

    /// Every component exceeds `other` by more than `tol`.
    pub fn strictly_exceeds(&self, other: &RatePoint, tol: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a - *b > tol)
    }
}

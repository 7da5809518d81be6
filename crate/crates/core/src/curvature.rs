//! Second derivatives of the rates and of the log Nash product along `Q(t) = X + t (Z - X)`.
//!
//! Traces are in natural-log units; `utility_second_derivative` converts to bits.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bargaining::{solve_nash_bargaining_on, NbOptions};
use crate::equilibrium::{find_nash_equilibrium, IwfOptions};
use crate::error::{Error, Result};
use crate::linalg::{congruence, inv_hpd, ln_det_hpd, trace_prod_re, trace_re, CMat};
use crate::model::{ComplexMatrix, CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};
use crate::pareto::{refined_boundary, ParetoBoundary};

/// Curvature at or below this counts as non-positive.
pub const CONCAVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexPath {
    x: StrategyProfile,
    z: StrategyProfile,
}

impl ConvexPath {
    pub fn new(sys: &InterferenceSystem, x: StrategyProfile, z: StrategyProfile) -> Result<Self> {
        x.validate(sys)?;
        z.validate(sys)?;
        Ok(Self { x, z })
    }

    pub fn x(&self) -> &StrategyProfile {
        &self.x
    }

    pub fn z(&self) -> &StrategyProfile {
        &self.z
    }

    /// `X + t (Z - X)`
    pub fn at(&self, t: f64) -> StrategyProfile {
        StrategyProfile::from_vec_unchecked(
            self.x
                .covariances()
                .iter()
                .zip(self.z.covariances())
                .map(|(x, z)| CovarianceMatrix::from_raw(x.dm() + (z.dm() - x.dm()).scale(t)))
                .collect(),
        )
    }

    fn q(&self, t: f64) -> Vec<CMat> {
        self.x
            .covariances()
            .iter()
            .zip(self.z.covariances())
            .map(|(x, z)| x.dm() + (z.dm() - x.dm()).scale(t))
            .collect()
    }

    fn y(&self) -> Vec<CMat> {
        self.x
            .covariances()
            .iter()
            .zip(self.z.covariances())
            .map(|(x, z)| z.dm() - x.dm())
            .collect()
    }
}

/// Matrices of one user at one path point.
struct UserParts {
    m: CMat,
    n: CMat,
    dr: CMat,
    /// `tr(A B A B)` with `A = (R + M)^{-1}`, `B = dR + N`
    abab: f64,
    /// `tr(R^{-1} dR R^{-1} dR)`
    rdrd: f64,
    /// `tr(A B)`
    ab: f64,
    /// `tr(R^{-1} dR)`
    rd: f64,
    /// `ln det(R + M) - ln det R`
    ln_ratio: f64,
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter {
            field: "t".into(),
            requirement: "in [0, 1]",
            value: t,
        })
    }
}

fn user_parts(sys: &InterferenceSystem, path: &ConvexPath, t: f64, i: usize) -> Result<UserParts> {
    check_t(t)?;
    sys.check_user(i)?;
    let q = path.q(t);
    let y = path.y();
    let nr = sys.nr();
    let mut r = CMat::identity(nr, nr);
    let mut dr = CMat::zeros(nr, nr);
    for j in 0..sys.users() {
        if j != i && sys.eta(i, j) != 0.0 {
            r += congruence(sys.hm(i, j), &q[j], sys.eta(i, j));
            dr += congruence(sys.hm(i, j), &y[j], sys.eta(i, j));
        }
    }
    let m = congruence(sys.hm(i, i), &q[i], sys.rho(i));
    let n = congruence(sys.hm(i, i), &y[i], sys.rho(i));
    let singular = Error::SingularMatrix {
        context: "interference-plus-noise covariance along the path",
    };
    let rpm = &r + &m;
    let a = inv_hpd(&rpm).ok_or(Error::SingularMatrix {
        context: "signal-plus-interference covariance along the path",
    })?;
    let rinv = inv_hpd(&r).ok_or(singular)?;
    let b = &dr + &n;
    let ab_m = &a * &b;
    let rd_m = &rinv * &dr;
    let ln_ratio = ln_det_hpd(&rpm).zip(ln_det_hpd(&r)).map(|(x, y)| x - y).ok_or(
        Error::SingularMatrix {
            context: "log-determinant along the path",
        },
    )?;
    Ok(UserParts {
        abab: trace_prod_re(&ab_m, &ab_m),
        rdrd: trace_prod_re(&rd_m, &rd_m),
        ab: trace_re(&ab_m),
        rd: trace_re(&rd_m),
        ln_ratio,
        m,
        n,
        dr,
    })
}

/// `d^2 I_i / dt^2` in bits.
pub fn utility_second_derivative(sys: &InterferenceSystem, path: &ConvexPath, t: f64, i: usize) -> Result<f64> {
    let p = user_parts(sys, path, t, i)?;
    Ok((-p.abab + p.rdrd) / LN_2)
}

/// `d I_i / dt` in bits.
#[cfg(test)]
pub(crate) fn utility_first_derivative(sys: &InterferenceSystem, path: &ConvexPath, t: f64, i: usize) -> Result<f64> {
    let p = user_parts(sys, path, t, i)?;
    Ok((p.ab - p.rd) / LN_2)
}

/// `h_i'' = tr(A B A B) - tr(R^{-1} dR R^{-1} dR)` for the constraint `h_i = I_i^NE - I_i`, in nats.
pub fn constraint_second_derivative(sys: &InterferenceSystem, path: &ConvexPath, t: f64, i: usize) -> Result<f64> {
    let p = user_parts(sys, path, t, i)?;
    Ok(p.abab - p.rdrd)
}

/// Second derivative of `f(t) = sum_i ln T_i` split into its per-user terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbCurvature {
    pub f_second: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `T_i = ln det(R + M) - ln det R - ln 2 * I_i^NE`
    pub t_values: Vec<f64>,
}

/// `f''(t) = sum_i (alpha_i + beta_i + gamma_i)`; requires every `T_i > 0`.
pub fn nb_objective_second_derivative(
    sys: &InterferenceSystem,
    path: &ConvexPath,
    t: f64,
    ne_rates: &RatePoint,
) -> Result<NbCurvature> {
    let parts: Vec<UserParts> = (0..sys.users())
        .map(|i| user_parts(sys, path, t, i))
        .collect::<Result<_>>()?;
    nb_terms(&parts, ne_rates)
}

fn nb_terms(parts: &[UserParts], ne_rates: &RatePoint) -> Result<NbCurvature> {
    let out = nb_terms_raw(parts, ne_rates);
    match out.t_values.iter().position(|&t| !(t > 0.0)) {
        Some(user) => Err(Error::OutsideBargainingSet {
            user,
            value: out.t_values[user],
        }),
        None => Ok(out),
    }
}

/// The closed-form terms without the `T_i > 0` check.
fn nb_terms_raw(parts: &[UserParts], ne_rates: &RatePoint) -> NbCurvature {
    let mut out = NbCurvature {
        f_second: 0.0,
        alpha: Vec::new(),
        beta: Vec::new(),
        gamma: Vec::new(),
        t_values: Vec::new(),
    };
    for (i, p) in parts.iter().enumerate() {
        let ti = p.ln_ratio - LN_2 * ne_rates.get(i);
        let d1 = p.ab - p.rd;
        let (a, b, g) = (-p.abab / ti, p.rdrd / ti, -(d1 * d1) / (ti * ti));
        out.alpha.push(a);
        out.beta.push(b);
        out.gamma.push(g);
        out.t_values.push(ti);
        out.f_second += a + b + g;
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureTerms {
    pub t: f64,
    pub m: Vec<ComplexMatrix>,
    pub n: Vec<ComplexMatrix>,
    pub d_r: Vec<ComplexMatrix>,
    pub t_values: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub f_second: f64,
    pub fi_second: Vec<f64>,
    pub h_second: Vec<f64>,
}

impl CurvatureTerms {
    pub fn all_t_positive(&self) -> bool {
        self.t_values.iter().all(|&t| t > 0.0)
    }
}

/// One scan point. Outside the bargaining set the terms are still filled in and `error` says why
/// they do not describe the Nash product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord {
    pub t: f64,
    pub terms: Option<CurvatureTerms>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureScan {
    pub records: Vec<ScanRecord>,
    /// Every `f''` evaluated inside the bargaining set is at most [`CONCAVITY_TOL`].
    pub concave: bool,
}

fn full_terms(sys: &InterferenceSystem, path: &ConvexPath, t: f64, ne_rates: &RatePoint) -> Result<CurvatureTerms> {
    let parts: Vec<UserParts> = (0..sys.users())
        .map(|i| user_parts(sys, path, t, i))
        .collect::<Result<_>>()?;
    let nb = nb_terms_raw(&parts, ne_rates);
    let wrap = |m: &CMat| ComplexMatrix::from_dmatrix(m.clone()).expect("finite path matrix");
    Ok(CurvatureTerms {
        t,
        m: parts.iter().map(|p| wrap(&p.m)).collect(),
        n: parts.iter().map(|p| wrap(&p.n)).collect(),
        d_r: parts.iter().map(|p| wrap(&p.dr)).collect(),
        fi_second: parts.iter().map(|p| (p.rdrd - p.abab) / LN_2).collect(),
        h_second: parts.iter().map(|p| p.abab - p.rdrd).collect(),
        t_values: nb.t_values,
        alpha: nb.alpha,
        beta: nb.beta,
        gamma: nb.gamma,
        f_second: nb.f_second,
    })
}

/// Terms at every `t` in `t_grid`; failing points are recorded and skipped.
pub fn curvature_scan(
    sys: &InterferenceSystem,
    path: &ConvexPath,
    t_grid: &[f64],
    ne_rates: &RatePoint,
) -> CurvatureScan {
    let records: Vec<ScanRecord> = t_grid
        .iter()
        .map(|&t| match full_terms(sys, path, t, ne_rates) {
            Ok(terms) => {
                let error = terms
                    .t_values
                    .iter()
                    .position(|&v| !(v > 0.0))
                    .map(|user| Error::OutsideBargainingSet { user, value: terms.t_values[user] }.to_string());
                ScanRecord {
                    t,
                    terms: Some(terms),
                    error,
                }
            }
            Err(e) => ScanRecord {
                t,
                terms: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let concave = records
        .iter()
        .filter_map(|r| r.terms.as_ref())
        .filter(|c| c.all_t_positive())
        .all(|c| c.f_second <= CONCAVITY_TOL);
    CurvatureScan { records, concave }
}

fn nearest_on_boundary(boundary: &ParetoBoundary, x: f64) -> Option<StrategyProfile> {
    boundary
        .points()
        .iter()
        .zip(boundary.strategies())
        .filter_map(|(p, s)| s.as_ref().map(|s| ((p.get(0) - x).abs(), s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s.clone())
}

/// Path from the boundary profile nearest to user-1 rate `nb_rate_1 / 2` (X) to the one
/// nearest to `nb_rate_1` (Z).
pub fn boundary_path(sys: &InterferenceSystem, boundary: &ParetoBoundary, nb_rate_1: f64) -> Result<ConvexPath> {
    let missing = || Error::TooFewPoints {
        found: boundary.len(),
        required: 1,
    };
    let x = nearest_on_boundary(boundary, nb_rate_1 / 2.0).ok_or_else(missing)?;
    let z = nearest_on_boundary(boundary, nb_rate_1).ok_or_else(missing)?;
    ConvexPath::new(sys, x, z)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelCurvature {
    pub snr: f64,
    pub inr: f64,
    pub t: f64,
    pub nb_exists: bool,
    pub terms: Option<CurvatureTerms>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LevelScanOptions {
    pub iwf: IwfOptions,
    pub nb: NbOptions,
}

fn level_point(
    template: &InterferenceSystem,
    snr: f64,
    inr: f64,
    t: f64,
    opts: &LevelScanOptions,
) -> Result<(bool, Option<CurvatureTerms>)> {
    let sys = template.with_levels(snr, inr)?;
    let ne = find_nash_equilibrium(&sys, None, &opts.iwf)?;
    let boundary = refined_boundary(
        &sys,
        &opts.nb.resolution,
        std::slice::from_ref(&ne.profile),
        &opts.nb.refine,
    )?;
    let nb = solve_nash_bargaining_on(&sys, &ne, Some(&boundary), &opts.nb)?;
    if !nb.exists {
        return Ok((false, None));
    }
    let path = boundary_path(&sys, &boundary, nb.rates.get(0))?;
    Ok((true, Some(full_terms(&sys, &path, t, &ne.rates_at_ne)?)))
}

/// `f''(t)` over an SNR x INR grid, with the path endpoints on the boundary at user-1 rates
/// `I_1^NB / 2` and `I_1^NB`. Points without an NB carry no terms.
pub fn level_scan(
    template: &InterferenceSystem,
    snr_grid: &[f64],
    inr_grid: &[f64],
    t: f64,
    opts: &LevelScanOptions,
) -> Vec<LevelCurvature> {
    let cells: Vec<(f64, f64)> = snr_grid
        .iter()
        .flat_map(|&s| inr_grid.iter().map(move |&i| (s, i)))
        .collect();
    cells
        .par_iter()
        .map(|&(snr, inr)| match level_point(template, snr, inr, t, opts) {
            Ok((nb_exists, terms)) => LevelCurvature {
                snr,
                inr,
                t,
                nb_exists,
                terms,
                error: None,
            },
            Err(e) => LevelCurvature {
                snr,
                inr,
                t,
                nb_exists: true,
                terms: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

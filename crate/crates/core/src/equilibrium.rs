//! Nash equilibrium by iterative water-filling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{congruence, inv_hpd, CMat};
use crate::model::{eig_sorted, CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};
use crate::pareto::GridResolution;
use crate::rates::{interference_dm, profile_refs, rate_dm, rate_vector};

const MODE_FLOOR: f64 = 1e-12;

/// Water-filling over the eigenmodes of the Hermitian PSD gain matrix `a`.
pub(crate) fn water_fill(a: &CMat, p: f64) -> CMat {
    let n = a.nrows();
    let (d, u) = eig_sorted(a);
    let active: Vec<usize> = (0..n).filter(|&k| d[k] > MODE_FLOOR).collect();
    if active.is_empty() || p <= 0.0 {
        return CMat::zeros(n, n);
    }
    let inv: Vec<f64> = active.iter().map(|&k| 1.0 / d[k]).collect();
    let fill = |mu: f64| inv.iter().map(|x| (mu - x).max(0.0)).sum::<f64>();
    let mut lo = inv.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = inv.iter().cloned().fold(0.0, f64::max) + p;
    for _ in 0..100 {
        let mu = 0.5 * (lo + hi);
        let t = fill(mu);
        if (t - p).abs() < 1e-12 {
            lo = mu;
            hi = mu;
            break;
        }
        if t > p {
            hi = mu;
        } else {
            lo = mu;
        }
    }
    let mu = 0.5 * (lo + hi);
    let mut powers = vec![0.0; n];
    for (&k, x) in active.iter().zip(&inv) {
        powers[k] = (mu - x).max(0.0);
    }
    // absorb the bisection residual so the budget is met exactly
    let total: f64 = powers.iter().sum();
    if total > 0.0 {
        for w in &mut powers {
            *w *= p / total;
        }
    }
    let diag = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(powers[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    crate::linalg::hermitize(&(&u * diag * u.adjoint()))
}

/// `rho_i H_ii^H R_{-i}^{-1} H_ii`
pub(crate) fn effective_gain(sys: &InterferenceSystem, qs: &[&CMat], i: usize) -> Result<CMat> {
    let r = interference_dm(sys, qs, i);
    let rinv = inv_hpd(&r).ok_or(Error::SingularNoiseCovariance)?;
    Ok(congruence(&sys.hm(i, i).adjoint(), &rinv, sys.rho(i)))
}

pub(crate) fn best_response_dm(sys: &InterferenceSystem, qs: &[&CMat], i: usize) -> Result<CMat> {
    Ok(water_fill(&effective_gain(sys, qs, i)?, sys.p(i)))
}

/// Interference-free water-filling covariance of user `i`.
pub(crate) fn single_user_optimum(sys: &InterferenceSystem, i: usize) -> CMat {
    let a = congruence(&sys.hm(i, i).adjoint(), &CMat::identity(sys.nr(), sys.nr()), sys.rho(i));
    water_fill(&a, sys.p(i))
}

/// User `i`'s water-filling response to the other users in `profile`.
pub fn water_fill_best_response(
    sys: &InterferenceSystem,
    profile: &StrategyProfile,
    i: usize,
) -> Result<CovarianceMatrix> {
    sys.check_user(i)?;
    profile.validate(sys)?;
    Ok(CovarianceMatrix::from_raw(best_response_dm(
        sys,
        &profile_refs(profile),
        i,
    )?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateSchedule {
    /// Users update one after another within a sweep (Gauss-Seidel).
    Sequential,
    /// All users respond to the previous sweep (Jacobi).
    Simultaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IwfOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub schedule: UpdateSchedule,
}

impl Default for IwfOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            schedule: UpdateSchedule::Sequential,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IwfReport {
    pub profile: StrategyProfile,
    /// Sweeps needed to reach the fixed point; the confirming sweep is not counted.
    pub iterations: usize,
    /// Largest per-user Frobenius change in the last sweep.
    pub final_change: f64,
    pub converged: bool,
    pub rates_at_ne: RatePoint,
    pub schedule: UpdateSchedule,
    pub tol: f64,
}

/// Best-response sweeps from `init` (uniform power by default) until no user moves by more than `tol`.
pub fn find_nash_equilibrium(
    sys: &InterferenceSystem,
    init: Option<&StrategyProfile>,
    opts: &IwfOptions,
) -> Result<IwfReport> {
    let start = match init {
        Some(p) => {
            p.validate(sys)?;
            p.clone()
        }
        None => StrategyProfile::uniform(sys),
    };
    let m = sys.users();
    let mut qs: Vec<CMat> = start.covariances().iter().map(|q| q.dm().clone()).collect();
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    let mut converged = false;
    while sweeps < opts.max_iter {
        change = 0.0;
        match opts.schedule {
            UpdateSchedule::Sequential => {
                for i in 0..m {
                    let refs: Vec<&CMat> = qs.iter().collect();
                    let next = best_response_dm(sys, &refs, i)?;
                    change = change.max((&next - &qs[i]).norm());
                    qs[i] = next;
                }
            }
            UpdateSchedule::Simultaneous => {
                let refs: Vec<&CMat> = qs.iter().collect();
                let next: Vec<CMat> = (0..m)
                    .map(|i| best_response_dm(sys, &refs, i))
                    .collect::<Result<_>>()?;
                for (q, n) in qs.iter_mut().zip(next) {
                    change = change.max((&n - &*q).norm());
                    *q = n;
                }
            }
        }
        if change <= opts.tol {
            converged = true;
            break;
        }
        sweeps += 1;
    }
    let profile = StrategyProfile::from_vec_unchecked(
        qs.into_iter().map(CovarianceMatrix::from_raw).collect(),
    );
    let rates_at_ne = rate_vector(sys, &profile)?;
    Ok(IwfReport {
        profile,
        iterations: sweeps,
        final_change: change,
        converged,
        rates_at_ne,
        schedule: opts.schedule,
        tol: opts.tol,
    })
}

/// Largest rate gain user `i` can find on the parameter grid with the others held fixed.
pub fn verify_best_response(
    sys: &InterferenceSystem,
    profile: &StrategyProfile,
    i: usize,
    grid: &GridResolution,
) -> Result<f64> {
    sys.check_user(i)?;
    profile.validate(sys)?;
    if sys.nt() > 2 {
        return Err(Error::UnsupportedDimension(format!(
            "grid oracle covers Nt <= 2, got Nt = {}",
            sys.nt()
        )));
    }
    let mut qs: Vec<CMat> = profile.covariances().iter().map(|q| q.dm().clone()).collect();
    let current = rate_dm(sys, &profile_refs(profile), i)?;
    let mut best = f64::NEG_INFINITY;
    for param in grid.params(sys.nt()) {
        qs[i] = param.matrix(sys.nt(), sys.p(i));
        let refs: Vec<&CMat> = qs.iter().collect();
        best = best.max(rate_dm(sys, &refs, i)?);
    }
    Ok(best - current)
}

//! Projected gradient ascent over strategy profiles.
//!
//! Objectives are functions of the rate vector only; the chain rule through
//! the analytic rate gradients gives the search direction, and every trial
//! point is projected back onto `{Q >= 0, tr Q <= p}`.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{congruence, hermitize, inv_hpd, trace_prod_re, CMat};
use crate::model::{eig_sorted, InterferenceSystem};
use crate::rates::{interference_dm, rates_dm};

/// Rates and `grads[i][j] = dI_i / dQ_j` in bits, under `<G, D> = Re tr(G D)`.
pub(crate) struct RateJacobian {
    pub rates: Vec<f64>,
    pub grads: Vec<Vec<CMat>>,
}

pub(crate) fn rate_jacobian(sys: &InterferenceSystem, qs: &[CMat]) -> Result<RateJacobian> {
    let m = sys.users();
    let refs: Vec<&CMat> = qs.iter().collect();
    let mut rates = Vec::with_capacity(m);
    let mut grads = Vec::with_capacity(m);
    for i in 0..m {
        let r = interference_dm(sys, &refs, i);
        let s = &r + congruence(sys.hm(i, i), &qs[i], sys.rho(i));
        let rinv = inv_hpd(&r).ok_or(Error::SingularNoiseCovariance)?;
        let sinv = inv_hpd(&s).ok_or(Error::SingularNoiseCovariance)?;
        let ld = crate::linalg::ln_det_hpd(&s).ok_or(Error::SingularNoiseCovariance)?
            - crate::linalg::ln_det_hpd(&r).ok_or(Error::SingularNoiseCovariance)?;
        rates.push((ld / LN_2).max(0.0));
        let diff = &sinv - &rinv;
        let row = (0..m)
            .map(|j| {
                let h = sys.hm(i, j);
                if j == i {
                    congruence(&h.adjoint(), &sinv, sys.rho(i) / LN_2)
                } else if sys.eta(i, j) == 0.0 {
                    CMat::zeros(sys.nt(), sys.nt())
                } else {
                    congruence(&h.adjoint(), &diff, sys.eta(i, j) / LN_2)
                }
            })
            .collect();
        grads.push(row);
    }
    Ok(RateJacobian { rates, grads })
}

/// Euclidean projection onto `{Q >= 0, tr Q <= p}`.
pub(crate) fn project(q: &CMat, p: f64) -> CMat {
    let n = q.nrows();
    let (mut lam, u) = eig_sorted(&hermitize(q));
    for l in lam.iter_mut() {
        *l = l.max(0.0);
    }
    let total: f64 = lam.iter().sum();
    if total > p {
        // lam is sorted descending: find the shift tau with sum (lam - tau)^+ = p
        let mut cum = 0.0;
        let mut tau = 0.0;
        for (k, l) in lam.iter().enumerate() {
            cum += l;
            let t = (cum - p) / (k + 1) as f64;
            if k + 1 == n || lam[k + 1] <= t {
                tau = t;
                break;
            }
        }
        for l in lam.iter_mut() {
            *l = (*l - tau).max(0.0);
        }
        // the shift cancels large values; restore the budget exactly
        let kept: f64 = lam.iter().sum();
        if kept > 0.0 {
            for l in lam.iter_mut() {
                *l *= p / kept;
            }
        }
    }
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(lam[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    hermitize(&(&u * d * u.adjoint()))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentOptions {
    pub max_iter: usize,
    /// Relative objective improvement below which the run stops.
    pub ftol: f64,
    /// Step (Frobenius) below which the run stops.
    pub xtol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            ftol: 1e-13,
            xtol: 1e-11,
        }
    }
}

pub(crate) struct AscentResult {
    pub qs: Vec<CMat>,
    pub rates: Vec<f64>,
    pub value: f64,
}

/// Objective of the rate vector: `Some((value, d value / d rates))`, or `None` outside its domain.
pub(crate) trait RateObjective {
    fn eval(&self, rates: &[f64]) -> Option<(f64, Vec<f64>)>;

    /// Early exit once this returns true.
    fn satisfied(&self, _rates: &[f64]) -> bool {
        false
    }
}

impl<F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>> RateObjective for F {
    fn eval(&self, rates: &[f64]) -> Option<(f64, Vec<f64>)> {
        self(rates)
    }
}

/// Projected gradient ascent with Armijo backtracking.
pub(crate) fn maximize(
    sys: &InterferenceSystem,
    start: Vec<CMat>,
    objective: &dyn RateObjective,
    opts: &AscentOptions,
) -> Result<AscentResult> {
    let m = sys.users();
    let mut qs: Vec<CMat> = start
        .iter()
        .enumerate()
        .map(|(i, q)| project(q, sys.p(i)))
        .collect();
    let mut jac = rate_jacobian(sys, &qs)?;
    let (mut value, mut w) = objective
        .eval(&jac.rates)
        .ok_or_else(|| Error::NotConverged("ascent started outside the objective's domain".into()))?;
    let mut step = f64::NAN;
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < opts.max_iter {
        if objective.satisfied(&jac.rates) {
            break;
        }
        iterations += 1;
        let dirs: Vec<CMat> = (0..m)
            .map(|j| {
                let mut g = CMat::zeros(sys.nt(), sys.nt());
                for i in 0..m {
                    if w[i] != 0.0 {
                        g += jac.grads[i][j].scale(w[i]);
                    }
                }
                g
            })
            .collect();
        let gnorm = dirs.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            break;
        }
        // no useful move is longer than the diameter of the feasible set
        let diameter = 2.0 * sys.budgets().iter().cloned().fold(0.0, f64::max);
        if !step.is_finite() {
            step = 0.1 / gnorm;
        }
        step = step.min(diameter / gnorm);
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<CMat> = (0..m)
                .map(|j| project(&(&qs[j] + dirs[j].scale(step)), sys.p(j)))
                .collect();
            let refs: Vec<&CMat> = trial.iter().collect();
            let rates = rates_dm(sys, &refs)?;
            if let Some((v, _)) = objective.eval(&rates) {
                let predicted: f64 = (0..m)
                    .map(|j| trace_prod_re(&dirs[j], &(&trial[j] - &qs[j])))
                    .sum();
                if v >= value + 1e-4 * predicted && v >= value {
                    accepted = Some((trial, v));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, v)) = accepted else {
            break;
        };
        let moved: f64 = (0..m)
            .map(|j| (&trial[j] - &qs[j]).norm_squared())
            .sum::<f64>()
            .sqrt();
        let gain = v - value;
        qs = trial;
        jac = rate_jacobian(sys, &qs)?;
        let (nv, nw) = objective
            .eval(&jac.rates)
            .ok_or_else(|| Error::NotConverged("ascent left the objective's domain".into()))?;
        value = nv;
        w = nw;
        step *= 2.0;
        if moved < opts.xtol || gain <= opts.ftol * (1.0 + value.abs()) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok(AscentResult {
        rates: jac.rates,
        qs,
        value,
    })
}

/// `-(1/k) ln sum exp(-k x_i)` and its gradient.
pub(crate) fn softmin(x: &[f64], kappa: f64) -> (f64, Vec<f64>) {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = x.iter().map(|v| (-kappa * (v - lo)).exp()).collect();
    let z: f64 = e.iter().sum();
    (lo - z.ln() / kappa, e.iter().map(|v| v / z).collect())
}


#[cfg(test)]
mod projection_props {
    use super::*;
    use proptest::prelude::*;

    fn hermitian(v: &[f64]) -> CMat {
        let a = CMat::from_fn(3, 3, |r, c| Complex64::new(v[r * 3 + c], v[9 + r * 3 + c]));
        (&a + a.adjoint()).scale(0.5)
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(
            v in proptest::collection::vec(-3.0..3.0f64, 18),
            p in 0.1..5.0f64,
        ) {
            let q = project(&hermitian(&v), p);
            let values = crate::model::hermitian_eig(&crate::model::ComplexMatrix::from_dmatrix(q.clone()).unwrap()).unwrap().values;
            prop_assert!(values.iter().all(|&l| l >= -1e-12));
            prop_assert!(q.trace().re <= p * (1.0 + 1e-12));
            prop_assert!((project(&q, p) - &q).norm() < 1e-9);
        }

        #[test]
        fn projection_is_closest_among_samples(
            v in proptest::collection::vec(-3.0..3.0f64, 18),
            w in proptest::collection::vec(-1.0..1.0f64, 18),
            p in 0.1..5.0f64,
        ) {
            let a = hermitian(&v);
            let q = project(&a, p);
            // any other feasible point is no closer
            let other = project(&(&q + hermitian(&w)), p);
            prop_assert!((&a - &q).norm() <= (&a - &other).norm() + 1e-9);
        }
    }
}

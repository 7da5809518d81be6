//! Nash bargaining over the pure-strategy rate region, with the NE as disagreement point.

mod classify;
mod comparators;
mod sweep;

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

pub use classify::{classify_feasible_type, FeasibleType};
pub use comparators::{comparator_solutions, jain_fairness_index};
pub use sweep::{existence_sweep, ExistenceOptions, ExistencePoint, Regime};

use crate::equilibrium::IwfReport;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};
use crate::optim::{maximize, softmin, AscentOptions, RateObjective};
use crate::pareto::{
    check_grid_dims, refined_boundary, GridResolution, ParetoBoundary, RefineOptions,
    StrategyParam2x2,
};
use crate::rates::{rate_vector, rates_dm};

/// Margin by which NB rates must exceed the NE rates.
pub const STRICT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Ne,
    Nb,
    Egalitarian,
    KalaiSmorodinsky,
    Utilitarian,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbMethod {
    Grid,
    ProjectedAscent,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub method: Option<NbMethod>,
    pub grid_nash_product: Option<f64>,
    pub ascent_nash_product: Option<f64>,
    /// `|NP_grid - NP_ascent| / max(NP_grid, NP_ascent)`.
    pub relative_disagreement: Option<f64>,
    /// `sum_i ln(I_i - I_i^NE)` with rates in bits.
    pub log_nash_product: Option<f64>,
    /// Same objective with the gaps measured in nats, `M ln ln 2 + ln NP`.
    pub log_nash_product_nats: Option<f64>,
    /// Ray intersections that no pure profile reaches exactly.
    pub interpolated: bool,
    pub interpolated_rates: Option<RatePoint>,
    pub starts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BargainingOutcome {
    pub kind: SolutionKind,
    pub profile: StrategyProfile,
    pub rates: RatePoint,
    /// Nash product, sum, product or minimum rate depending on `kind`.
    pub objective_value: f64,
    pub exists: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbOptions {
    pub method: NbMethod,
    pub resolution: GridResolution,
    pub refine: RefineOptions,
    pub strict_tol: f64,
    pub ascent_iter: usize,
}

impl Default for NbOptions {
    fn default() -> Self {
        Self {
            method: NbMethod::Both,
            resolution: GridResolution::default(),
            refine: RefineOptions::default(),
            strict_tol: STRICT_TOL,
            ascent_iter: 4000,
        }
    }
}

impl NbOptions {
    /// Cheaper settings for sweeps.
    pub fn coarse() -> Self {
        Self {
            method: NbMethod::ProjectedAscent,
            resolution: GridResolution {
                s: 7,
                theta: 6,
                phi: 4,
                c: 4,
            },
            refine: RefineOptions::coarse(),
            strict_tol: STRICT_TOL,
            ascent_iter: 1500,
        }
    }
}

/// Whether some boundary point beats the NE rates by more than `strict_tol` for every user.
pub fn nb_exists(ne: &IwfReport, boundary: &ParetoBoundary, strict_tol: f64) -> Result<bool> {
    require_converged(ne)?;
    Ok(boundary.strictly_dominates(&ne.rates_at_ne, strict_tol))
}

fn require_converged(ne: &IwfReport) -> Result<()> {
    if ne.converged {
        Ok(())
    } else {
        Err(Error::NotConverged(format!(
            "disagreement point needs a converged NE (change {:.3e} after {} sweeps)",
            ne.final_change, ne.iterations
        )))
    }
}

fn log_gain(rates: &[f64], ne: &[f64], tol: f64) -> Option<f64> {
    let mut v = 0.0;
    for (r, n) in rates.iter().zip(ne) {
        let g = r - n;
        if g <= tol {
            return None;
        }
        v += g.ln();
    }
    Some(v)
}

fn to_dms(profile: &StrategyProfile) -> Vec<CMat> {
    profile.covariances().iter().map(|q| q.dm().clone()).collect()
}

pub(crate) fn to_profile(qs: &[CMat]) -> StrategyProfile {
    StrategyProfile::from_vec_unchecked(qs.iter().cloned().map(CovarianceMatrix::from_raw).collect())
}

/// Softmin of the gains over the NE, stopping once every gain clears `margin`.
struct Phase1<'a> {
    ne: &'a [f64],
    margin: f64,
}

impl RateObjective for Phase1<'_> {
    fn eval(&self, rates: &[f64]) -> Option<(f64, Vec<f64>)> {
        let gaps: Vec<f64> = rates.iter().zip(self.ne).map(|(r, n)| r - n).collect();
        Some(softmin(&gaps, 40.0))
    }

    fn satisfied(&self, rates: &[f64]) -> bool {
        rates.iter().zip(self.ne).all(|(r, n)| r - n > self.margin)
    }
}

struct Candidate {
    qs: Vec<CMat>,
    log_np: f64,
}

fn ascent_nb(
    sys: &InterferenceSystem,
    ne: &[f64],
    seeds: Vec<Vec<CMat>>,
    opts: &NbOptions,
) -> Result<Option<Candidate>> {
    let ascent = AscentOptions {
        max_iter: opts.ascent_iter,
        ..AscentOptions::default()
    };
    let tol = opts.strict_tol;
    let objective = |r: &[f64]| {
        let v = log_gain(r, ne, 0.0)?;
        Some((v, r.iter().zip(ne).map(|(x, n)| 1.0 / (x - n)).collect()))
    };
    let phase1 = Phase1 {
        ne,
        margin: (10.0 * tol).max(1e-4),
    };
    let mut best: Option<Candidate> = None;
    for seed in seeds {
        let refs: Vec<&CMat> = seed.iter().collect();
        let rates = rates_dm(sys, &refs)?;
        let start = if log_gain(&rates, ne, tol).is_some() {
            seed
        } else {
            let r = maximize(sys, seed, &phase1, &ascent)?;
            if !phase1.satisfied(&r.rates) {
                continue;
            }
            r.qs
        };
        let r = maximize(sys, start, &objective, &ascent)?;
        if log_gain(&r.rates, ne, tol).is_some()
            && best.as_ref().is_none_or(|b| r.value > b.log_np)
        {
            best = Some(Candidate {
                qs: r.qs,
                log_np: r.value,
            });
        }
    }
    Ok(best)
}

/// Coordinate pattern search over the 2x2 parameterization of every user.
fn compass_refine(sys: &InterferenceSystem, ne: &[f64], start: &[CMat], tol: f64) -> Candidate {
    let nt = sys.nt();
    let score = |qs: &[CMat]| -> f64 {
        let refs: Vec<&CMat> = qs.iter().collect();
        rates_dm(sys, &refs)
            .ok()
            .and_then(|r| log_gain(&r, ne, tol))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let build = |x: &[[f64; 4]]| -> Vec<CMat> {
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                StrategyParam2x2::new(v[0], v[1], v[2], v[3])
                    .clamped()
                    .matrix(nt, sys.p(i))
            })
            .collect()
    };
    let mut x: Vec<[f64; 4]> = start
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let p = StrategyParam2x2::from_covariance(&CovarianceMatrix::from_raw(q.clone()), sys.p(i));
            [p.s, p.theta, p.phi, p.c]
        })
        .collect();
    let axes: &[usize] = if nt == 1 { &[3] } else { &[0, 1, 2, 3] };
    let mut qs = build(&x);
    let mut best = score(&qs);
    let mut step = 0.05;
    let mut evals = 0;
    while step > 1e-7 && evals < 20_000 {
        let mut improved = false;
        for i in 0..x.len() {
            for &a in axes {
                for sign in [1.0, -1.0] {
                    let mut trial = x.clone();
                    trial[i][a] += sign * step;
                    let tq = build(&trial);
                    let v = score(&tq);
                    evals += 1;
                    if v > best {
                        best = v;
                        x = trial;
                        qs = tq;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let start_score = score(start);
    if start_score > best {
        return Candidate {
            qs: start.to_vec(),
            log_np: start_score,
        };
    }
    Candidate { qs, log_np: best }
}

fn disagreement(ne: &IwfReport, opts: &NbOptions, starts: usize) -> BargainingOutcome {
    BargainingOutcome {
        kind: SolutionKind::Nb,
        profile: ne.profile.clone(),
        rates: ne.rates_at_ne.clone(),
        objective_value: 0.0,
        exists: false,
        diagnostics: Diagnostics {
            method: Some(opts.method),
            starts,
            ..Diagnostics::default()
        },
    }
}

/// Nash bargaining solution of a two-user system, computing its own refined boundary.
pub fn solve_nash_bargaining(
    sys: &InterferenceSystem,
    ne: &IwfReport,
    opts: &NbOptions,
) -> Result<BargainingOutcome> {
    require_converged(ne)?;
    let boundary = if check_grid_dims(sys).is_ok() {
        Some(refined_boundary(
            sys,
            &opts.resolution,
            std::slice::from_ref(&ne.profile),
            &opts.refine,
        )?)
    } else {
        None
    };
    solve_nash_bargaining_on(sys, ne, boundary.as_ref(), opts)
}

/// Nash bargaining solution using a precomputed boundary for seeding and the grid method.
///
/// Without a boundary only the projected ascent runs.
pub fn solve_nash_bargaining_on(
    sys: &InterferenceSystem,
    ne: &IwfReport,
    boundary: Option<&ParetoBoundary>,
    opts: &NbOptions,
) -> Result<BargainingOutcome> {
    require_converged(ne)?;
    let ne_rates = ne.rates_at_ne.rates().to_vec();
    let tol = opts.strict_tol;

    // Boundary samples ranked by Nash product, infeasible ones by their smallest gain.
    let mut ranked: Vec<(f64, Vec<CMat>)> = Vec::new();
    if let Some(b) = boundary {
        for (p, s) in b.points().iter().zip(b.strategies()) {
            if let Some(s) = s {
                let key = match log_gain(p.rates(), &ne_rates, tol) {
                    Some(v) => 1e6 + v,
                    None => p
                        .rates()
                        .iter()
                        .zip(&ne_rates)
                        .map(|(r, n)| r - n)
                        .fold(f64::INFINITY, f64::min),
                };
                ranked.push((key, to_dms(s)));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let boundary_exists = boundary.is_some_and(|b| b.strictly_dominates(&ne.rates_at_ne, tol));

    let grid_first = match (boundary_exists, opts.method) {
        (true, NbMethod::Grid | NbMethod::Both) => {
            Some(compass_refine(sys, &ne_rates, &ranked[0].1, tol))
        }
        _ => None,
    };
    // The ascent also settles existence when the boundary samples cannot.
    let run_ascent = opts.method != NbMethod::Grid || grid_first.is_none();
    let mut starts = 0;
    let ascent = if run_ascent {
        let mut seeds = vec![to_dms(&ne.profile)];
        seeds.extend(ranked.iter().take(7).map(|(_, q)| q.clone()));
        starts = seeds.len();
        ascent_nb(sys, &ne_rates, seeds, opts)?
    } else {
        None
    };
    let grid = match (grid_first, &ascent) {
        (Some(g), _) => Some(g),
        (None, Some(a)) if opts.method != NbMethod::ProjectedAscent => {
            Some(compass_refine(sys, &ne_rates, &a.qs, tol))
        }
        _ => None,
    };
    let grid_np = grid.as_ref().map(np_of);
    let ascent_np = match opts.method {
        NbMethod::Grid => None,
        _ => ascent.as_ref().map(np_of),
    };
    let chosen = match opts.method {
        NbMethod::Grid => grid,
        NbMethod::ProjectedAscent => ascent,
        NbMethod::Both => match (grid, ascent) {
            (Some(g), Some(a)) => Some(if a.log_np > g.log_np { a } else { g }),
            (g, a) => g.or(a),
        },
    };
    match chosen {
        Some(c) => finish(sys, ne, opts, c, grid_np, ascent_np, starts),
        None => Ok(disagreement(ne, opts, starts)),
    }
}

fn np_of(c: &Candidate) -> f64 {
    c.log_np.exp()
}

fn finish(
    sys: &InterferenceSystem,
    ne: &IwfReport,
    opts: &NbOptions,
    c: Candidate,
    grid_np: Option<f64>,
    ascent_np: Option<f64>,
    starts: usize,
) -> Result<BargainingOutcome> {
    let profile = to_profile(&c.qs);
    let rates = rate_vector(sys, &profile)?;
    let log_np = log_gain(rates.rates(), ne.rates_at_ne.rates(), 0.0).unwrap_or(c.log_np);
    let relative_disagreement = match (grid_np, ascent_np) {
        (Some(g), Some(a)) => Some((g - a).abs() / g.max(a)),
        _ => None,
    };
    Ok(BargainingOutcome {
        kind: SolutionKind::Nb,
        profile,
        rates,
        objective_value: log_np.exp(),
        exists: true,
        diagnostics: Diagnostics {
            method: Some(opts.method),
            grid_nash_product: grid_np,
            ascent_nash_product: ascent_np,
            relative_disagreement,
            log_nash_product: Some(log_np),
            log_nash_product_nats: Some(sys.users() as f64 * LN_2.ln() + log_np),
            interpolated: false,
            interpolated_rates: None,
            starts,
        },
    })
}

/// Points on `(x - I_1^NE)(y - I_2^NE) = nash_product`, gains log-spaced around `sqrt(nash_product)`.
pub fn nash_curve(ne_rates: &RatePoint, nash_product: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    if ne_rates.len() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "Nash curve covers two users, got {}",
            ne_rates.len()
        )));
    }
    if !(nash_product > 0.0) {
        return Err(Error::NonPositiveParameter {
            field: "nash_product".into(),
            requirement: "> 0",
            value: nash_product,
        });
    }
    let root = nash_product.sqrt();
    let (lo, hi) = ((root / 10.0).ln(), (root * 10.0).ln());
    Ok((0..samples)
        .map(|k| {
            let t = if samples == 1 {
                0.5
            } else {
                k as f64 / (samples - 1) as f64
            };
            let g = (lo + t * (hi - lo)).exp();
            (ne_rates.get(0) + g, ne_rates.get(1) + nash_product / g)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{find_nash_equilibrium, IwfOptions};
    use crate::model::ComplexMatrix;

    fn fig2() -> InterferenceSystem {
        let d = |a: f64, b: f64| ComplexMatrix::from_real_diag(&[a, b]);
        InterferenceSystem::two_user(d(1.8, 1.0), d(1.0, 1.0), d(1.0, 1.0), d(1.0, 1.8), 20.0, 14.0).unwrap()
    }

    #[test]
    fn log_gain_needs_strict_improvement() {
        assert!((log_gain(&[2.0, 3.0], &[1.0, 1.0], 1e-6).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(log_gain(&[2.0, 1.0], &[1.0, 1.0], 1e-6).is_none());
        assert!(log_gain(&[2.0, 1.0 + 1e-7], &[1.0, 1.0], 1e-6).is_none());
    }

    #[test]
    fn unconverged_equilibrium_is_rejected() {
        let sys = fig2();
        let opts = IwfOptions {
            max_iter: 1,
            ..IwfOptions::default()
        };
        let ne = find_nash_equilibrium(&sys, None, &opts).unwrap();
        assert!(!ne.converged);
        assert!(matches!(
            solve_nash_bargaining_on(&sys, &ne, None, &NbOptions::coarse()),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn grid_and_ascent_agree_on_fig2() {
        let sys = fig2();
        let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
        let nb = solve_nash_bargaining(&sys, &ne, &NbOptions::default()).unwrap();
        let d = &nb.diagnostics;
        assert_eq!(d.method, Some(NbMethod::Both));
        assert!(d.relative_disagreement.unwrap() < 1e-3);
        let np = nb.objective_value;
        assert!((d.log_nash_product.unwrap() - np.ln()).abs() < 1e-9);
        assert!((d.log_nash_product_nats.unwrap() - (np.ln() + 2.0 * LN_2.ln())).abs() < 1e-9);
    }

    #[test]
    fn nash_curve_rejects_bad_input() {
        let r = RatePoint::new(vec![1.0, 1.0]).unwrap();
        assert!(nash_curve(&r, 0.0, 10).is_err());
        assert!(nash_curve(&RatePoint::new(vec![1.0]).unwrap(), 1.0, 10).is_err());
        let mid = nash_curve(&r, 4.0, 1).unwrap();
        assert!((mid[0].0 - 3.0).abs() < 1e-12 && (mid[0].1 - 3.0).abs() < 1e-12);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_nash_bargaining, NbOptions};
use crate::equilibrium::{find_nash_equilibrium, IwfOptions};
use crate::error::Result;
use crate::model::{InterferenceSystem, RatePoint};

/// Smallest NE eigenvalue, relative to the budget, below which a stream counts as shut down.
pub const STREAM_OFF_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SelfishCompetition,
    NbRegion,
    StreamControl,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SelfishCompetition => "selfish_competition",
            Regime::NbRegion => "nb_region",
            Regime::StreamControl => "stream_control",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExistenceOptions {
    pub iwf: IwfOptions,
    pub nb: NbOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExistencePoint {
    pub snr: f64,
    pub inr: f64,
    pub exists: bool,
    pub regime: Option<Regime>,
    pub ne_rates: Option<RatePoint>,
    pub nb_rates: Option<RatePoint>,
    /// Failure at this grid point; the sweep carries on.
    pub error: Option<String>,
}

fn evaluate(sys: &InterferenceSystem, snr: f64, inr: f64, opts: &ExistenceOptions) -> Result<ExistencePoint> {
    let sys = sys.with_levels(snr, inr)?;
    let ne = find_nash_equilibrium(&sys, None, &opts.iwf)?;
    let nb = solve_nash_bargaining(&sys, &ne, &opts.nb)?;
    let regime = if nb.exists {
        Regime::NbRegion
    } else if ne
        .profile
        .covariances()
        .iter()
        .enumerate()
        .any(|(i, q)| q.min_eigenvalue() < STREAM_OFF_TOL * sys.p(i))
    {
        Regime::StreamControl
    } else {
        Regime::SelfishCompetition
    };
    Ok(ExistencePoint {
        snr,
        inr,
        exists: nb.exists,
        regime: Some(regime),
        ne_rates: Some(ne.rates_at_ne),
        nb_rates: Some(nb.rates),
        error: None,
    })
}

/// NE, NB existence and regime at every `(snr, inr)` pair, SNR-major.
pub fn existence_sweep(
    template: &InterferenceSystem,
    snr_grid: &[f64],
    inr_grid: &[f64],
    opts: &ExistenceOptions,
) -> Vec<ExistencePoint> {
    let cells: Vec<(f64, f64)> = snr_grid
        .iter()
        .flat_map(|&s| inr_grid.iter().map(move |&i| (s, i)))
        .collect();
    cells
        .par_iter()
        .map(|&(snr, inr)| {
            evaluate(template, snr, inr, opts).unwrap_or_else(|e| ExistencePoint {
                snr,
                inr,
                exists: false,
                regime: None,
                ne_rates: None,
                nb_rates: None,
                error: Some(e.to_string()),
            })
        })
        .collect()
}

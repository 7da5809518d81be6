use super::{to_profile, BargainingOutcome, Diagnostics, SolutionKind};
use crate::equilibrium::IwfReport;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{InterferenceSystem, RatePoint, StrategyProfile};
use crate::optim::{maximize, softmin, AscentOptions};
use crate::pareto::{single_user_rates, ParetoBoundary};
use crate::rates::rate_vector;

/// Jain's index of `measured / optimal`.
pub fn jain_fairness_index(measured: &[f64], optimal: &[f64]) -> Result<f64> {
    if measured.len() != optimal.len() || measured.is_empty() {
        return Err(Error::ShapeMismatch {
            field: "optimal".into(),
            expected: format!("{} entries", measured.len().max(1)),
            found: format!("{} entries", optimal.len()),
        });
    }
    if let Some(user) = optimal.iter().position(|&o| !(o > 0.0)) {
        return Err(Error::ZeroOptimalUtility { user });
    }
    let x: Vec<f64> = measured.iter().zip(optimal).map(|(m, o)| m / o).collect();
    let s: f64 = x.iter().sum();
    let s2: f64 = x.iter().map(|v| v * v).sum();
    if s2 == 0.0 {
        return Ok(1.0);
    }
    Ok(s * s / (x.len() as f64 * s2))
}

fn qs_of(profile: &StrategyProfile) -> Vec<CMat> {
    profile.covariances().iter().map(|q| q.dm().clone()).collect()
}

/// First crossing of the ray `y / x = slope` along the sorted boundary.
fn ray_crossing(boundary: &ParetoBoundary, slope: f64) -> Option<((f64, f64), usize)> {
    let pts = boundary.xy();
    let f = |p: (f64, f64)| p.1 - slope * p.0;
    for (k, w) in pts.windows(2).enumerate() {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if fa == 0.0 {
            return Some((w[0], k));
        }
        if fa > 0.0 && fb <= 0.0 {
            let t = fa / (fa - fb);
            let x = w[0].0 + t * (w[1].0 - w[0].0);
            let y = w[0].1 + t * (w[1].1 - w[0].1);
            let nearest = if t < 0.5 { k } else { k + 1 };
            return Some(((x, y), nearest));
        }
    }
    match pts.as_slice() {
        [only] if f(*only).abs() <= 1e-12 * (1.0 + only.0) => Some((*only, 0)),
        _ => None,
    }
}

/// Max-min ascent along the ray from a boundary seed, sharpening the soft minimum in stages.
fn refine_on_ray(sys: &InterferenceSystem, dir: [f64; 2], seed: Vec<CMat>) -> Result<(Vec<CMat>, Vec<f64>)> {
    let mut qs = seed;
    let mut rates = Vec::new();
    for kappa in [40.0, 400.0, 4000.0] {
        let objective = move |r: &[f64]| {
            let (v, g) = softmin(&[r[0] / dir[0], r[1] / dir[1]], kappa);
            Some((v, vec![g[0] / dir[0], g[1] / dir[1]]))
        };
        let r = maximize(sys, qs, &objective, &AscentOptions::default())?;
        qs = r.qs;
        rates = r.rates;
    }
    Ok((qs, rates))
}

fn ray_solution(
    sys: &InterferenceSystem,
    boundary: &ParetoBoundary,
    kind: SolutionKind,
    dir: [f64; 2],
) -> Result<BargainingOutcome> {
    let slope = dir[1] / dir[0];
    let ((x, y), nearest) = ray_crossing(boundary, slope).ok_or(Error::NoIntersection { slope })?;
    let crossing = RatePoint::from_vec_unchecked(vec![x, y]);
    let seed = boundary.strategies()[nearest].as_ref().map(qs_of);
    let refined = match seed {
        Some(s) => Some(refine_on_ray(sys, dir, s)?),
        None => None,
    };
    // Accept the refined profile when it lands on the ray and matches the interpolated crossing.
    let on_ray = refined.as_ref().filter(|(_, r)| {
        let (a, b) = (r[0] / dir[0], r[1] / dir[1]);
        (a - b).abs() <= 1e-3 * a.max(b) && r[0] >= x - 1e-3 * (1.0 + x)
    });
    let (profile, rates, interpolated) = match on_ray {
        Some((qs, _)) => {
            let p = to_profile(qs);
            let r = rate_vector(sys, &p)?;
            (p, r, false)
        }
        None => {
            let p = boundary.strategies()[nearest]
                .clone()
                .ok_or(Error::NoIntersection { slope })?;
            (p, crossing.clone(), true)
        }
    };
    Ok(BargainingOutcome {
        kind,
        profile,
        objective_value: (rates.get(0) / dir[0]).min(rates.get(1) / dir[1]),
        rates,
        exists: true,
        diagnostics: Diagnostics {
            interpolated,
            interpolated_rates: Some(crossing),
            ..Diagnostics::default()
        },
    })
}

fn argmax_solution(
    sys: &InterferenceSystem,
    boundary: &ParetoBoundary,
    kind: SolutionKind,
) -> Result<BargainingOutcome> {
    let value = |r: &[f64]| match kind {
        SolutionKind::Utilitarian => r[0] + r[1],
        _ => r[0] * r[1],
    };
    let (k, _) = boundary
        .points()
        .iter()
        .enumerate()
        .filter(|(k, _)| boundary.strategies()[*k].is_some())
        .max_by(|a, b| value(a.1.rates()).total_cmp(&value(b.1.rates())))
        .ok_or(Error::TooFewPoints {
            found: 0,
            required: 1,
        })?;
    let seed = qs_of(boundary.strategies()[k].as_ref().expect("filtered above"));
    let objective = |r: &[f64]| match kind {
        SolutionKind::Utilitarian => Some((r[0] + r[1], vec![1.0, 1.0])),
        _ => {
            if r[0] <= 0.0 || r[1] <= 0.0 {
                None
            } else {
                Some((r[0].ln() + r[1].ln(), vec![1.0 / r[0], 1.0 / r[1]]))
            }
        }
    };
    let mut profile = boundary.strategies()[k].clone().expect("filtered above");
    if objective(boundary.points()[k].rates()).is_some() {
        let r = maximize(sys, seed, &objective, &AscentOptions::default())?;
        let candidate = to_profile(&r.qs);
        let cr = rate_vector(sys, &candidate)?;
        if value(cr.rates()) >= value(boundary.points()[k].rates()) {
            profile = candidate;
        }
    }
    let rates = rate_vector(sys, &profile)?;
    Ok(BargainingOutcome {
        kind,
        profile,
        objective_value: value(rates.rates()),
        rates,
        exists: true,
        diagnostics: Diagnostics::default(),
    })
}

/// The NE followed by the Egalitarian, Kalai-Smorodinsky, Utilitarian and Proportional
/// solutions on a two-user boundary.
pub fn comparator_solutions(
    sys: &InterferenceSystem,
    boundary: &ParetoBoundary,
    ne: &IwfReport,
) -> Result<Vec<BargainingOutcome>> {
    sys.require_two_users("comparator solutions")?;
    if boundary.is_empty() {
        return Err(Error::TooFewPoints {
            found: 0,
            required: 1,
        });
    }
    let d = single_user_rates(sys)?;
    let disagreement = BargainingOutcome {
        kind: SolutionKind::Ne,
        profile: ne.profile.clone(),
        rates: ne.rates_at_ne.clone(),
        objective_value: 0.0,
        exists: true,
        diagnostics: Diagnostics::default(),
    };
    Ok(vec![
        disagreement,
        ray_solution(sys, boundary, SolutionKind::Egalitarian, [1.0, 1.0])?,
        ray_solution(sys, boundary, SolutionKind::KalaiSmorodinsky, [d[0], d[1]])?,
        argmax_solution(sys, boundary, SolutionKind::Utilitarian)?,
        argmax_solution(sys, boundary, SolutionKind::Proportional)?,
    ])
}

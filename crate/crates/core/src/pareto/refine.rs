use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{
    check_grid_dims, filter_tagged, frontier_pairs, hull_height, normal_gaps, single_user_rates, upper_hull, BoundaryKind,
    Candidates, GridResolution, PairTable, ParetoBoundary,
};
use crate::equilibrium::single_user_optimum;
use crate::error::Result;
use crate::linalg::CMat;
use crate::model::{CovarianceMatrix, InterferenceSystem, StrategyProfile};
use crate::rates::rates_dm;
use crate::optim::{maximize, softmin, AscentOptions};

type Tagged = (f64, f64, Option<StrategyProfile>);

fn profile_of(qs: &[CMat]) -> StrategyProfile {
    StrategyProfile::from_vec_unchecked(qs.iter().cloned().map(CovarianceMatrix::from_raw).collect())
}

/// Grid-plus-dominance boundary. `anchors` contribute their covariances as extra candidates.
pub fn pure_boundary(
    sys: &InterferenceSystem,
    res: &GridResolution,
    anchors: &[StrategyProfile],
) -> Result<ParetoBoundary> {
    check_grid_dims(sys)?;
    let mut cands = [Candidates::grid(sys, 0, res), Candidates::grid(sys, 1, res)];
    for (i, c) in cands.iter_mut().enumerate() {
        for a in anchors {
            a.validate(sys)?;
            c.push(a.get(i).dm().clone());
        }
        c.push(single_user_optimum(sys, i));
    }
    let table = PairTable::new(sys, &cands[0].qs, &cands[1].qs);
    let tagged = frontier_pairs(&table)
        .into_iter()
        .map(|(x, y, a, b)| {
            let profile = profile_of(&[cands[0].qs[a].clone(), cands[1].qs[b].clone()]);
            (x, y, Some(profile))
        })
        .collect();
    Ok(filter_tagged(tagged, BoundaryKind::Pure).with_meta(
        BoundaryKind::Pure,
        Some(*res),
        false,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Number of rays between the two axes.
    pub rays: usize,
    /// Sharpness of the soft minimum along each ray.
    pub kappa: f64,
    pub max_iter: usize,
    /// Additional ray directions in rate space, `[dx, dy]`.
    pub extra_directions: Vec<[f64; 2]>,
    /// Rounds of re-aimed rays at points left below the concave hull.
    pub repair_passes: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            rays: 47,
            kappa: 40.0,
            max_iter: 3000,
            extra_directions: Vec::new(),
            repair_passes: 3,
        }
    }
}

impl RefineOptions {
    pub fn coarse() -> Self {
        Self {
            rays: 15,
            kappa: 40.0,
            max_iter: 400,
            extra_directions: Vec::new(),
            repair_passes: 2,
        }
    }
}

struct RayResult {
    qs: Vec<CMat>,
    rates: Vec<f64>,
    value: f64,
}

fn ray_ascent(
    sys: &InterferenceSystem,
    dir: [f64; 2],
    kappa: f64,
    seeds: &[Vec<CMat>],
    opts: &AscentOptions,
) -> Result<Option<RayResult>> {
    let objective = move |r: &[f64]| {
        let x = [r[0] / dir[0], r[1] / dir[1]];
        let (v, g) = softmin(&x, kappa);
        Some((v, vec![g[0] / dir[0], g[1] / dir[1]]))
    };
    let mut best: Option<RayResult> = None;
    for seed in seeds {
        let res = maximize(sys, seed.clone(), &objective, opts)?;
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(RayResult {
                qs: res.qs,
                rates: res.rates,
                value: res.value,
            });
        }
    }
    Ok(best)
}

/// Ray ascent at `kappa`, then warm-started at 10 and 100 times `kappa`; every stage's point is kept.
///
/// A soft minimum slides along steep stretches of the boundary by about
/// `ln(slope) / kappa`, so a single stage can land far from its ray.
fn sharpened_ray(
    sys: &InterferenceSystem,
    dir: [f64; 2],
    kappa: f64,
    mut seeds: Vec<Vec<CMat>>,
    opts: &AscentOptions,
    out: &mut Vec<Tagged>,
) -> Result<Option<Vec<CMat>>> {
    let mut last = None;
    for sharp in [1.0, 10.0, 100.0] {
        let Some(r) = ray_ascent(sys, dir, kappa * sharp, &seeds, opts)? else {
            break;
        };
        out.push((r.rates[0], r.rates[1], Some(profile_of(&r.qs))));
        seeds = vec![r.qs.clone()];
        last = Some(r.qs);
    }
    Ok(last)
}

/// Ray and grid candidates for the refined boundary, before any repair.
fn ray_candidates(
    sys: &InterferenceSystem,
    res: &GridResolution,
    anchors: &[StrategyProfile],
    opts: &RefineOptions,
) -> Result<Vec<Tagged>> {
    let grid = pure_boundary(sys, res, anchors)?;
    let d = single_user_rates(sys)?;
    let scale = [d[0].max(1e-12), d[1].max(1e-12)];
    let mut dirs: Vec<[f64; 2]> = (0..opts.rays)
        .map(|k| {
            let psi = (k + 1) as f64 / (opts.rays + 1) as f64 * FRAC_PI_2;
            [psi.cos() * scale[0], psi.sin() * scale[1]]
        })
        .collect();
    dirs.extend(opts.extra_directions.iter().copied());

    let grid_qs: Vec<Vec<CMat>> = grid
        .strategies()
        .iter()
        .map(|s| {
            s.as_ref()
                .expect("grid points carry strategies")
                .covariances()
                .iter()
                .map(|q| q.dm().clone())
                .collect()
        })
        .collect();
    let ascent = ascent_options(opts);

    let mut tagged: Vec<Tagged> = Vec::new();
    let wf = [single_user_optimum(sys, 0), single_user_optimum(sys, 1)];
    let zero = CMat::zeros(sys.nt(), sys.nt());
    tagged.push((d[0], 0.0, Some(profile_of(&[wf[0].clone(), zero.clone()]))));
    tagged.push((0.0, d[1], Some(profile_of(&[zero, wf[1].clone()]))));

    let mut previous: Option<Vec<CMat>> = None;
    for (k, dir) in dirs.iter().enumerate() {
        let score = |p: (f64, f64)| (p.0 / dir[0]).min(p.1 / dir[1]);
        let best_grid = grid
            .xy()
            .iter()
            .enumerate()
            .max_by(|a, b| score(*a.1).total_cmp(&score(*b.1)))
            .map(|(i, _)| i);
        let mut seeds = Vec::new();
        if let Some(i) = best_grid {
            seeds.push(grid_qs[i].clone());
        }
        // continuation only along the evenly spaced rays
        if k < opts.rays {
            if let Some(p) = previous.take() {
                seeds.push(p);
            }
        }
        if let Some(r) = ray_ascent(sys, *dir, opts.kappa, &seeds, &ascent)? {
            tagged.push((r.rates[0], r.rates[1], Some(profile_of(&r.qs))));
            if k < opts.rays {
                previous = Some(r.qs);
            }
        }
    }
    // grid samples stay candidates where the rays are sparse
    for (p, s) in grid.points().iter().zip(grid.strategies()) {
        tagged.push((p.get(0), p.get(1), s.clone()));
    }
    Ok(tagged)
}

fn ascent_options(opts: &RefineOptions) -> AscentOptions {
    AscentOptions {
        max_iter: opts.max_iter,
        ..AscentOptions::default()
    }
}

/// Boundary from soft max-min ascents along rays in rate space, seeded from the grid.
///
/// Ray `k` maximizes a smooth minimum of `I_i / v_i` for a direction `v`
/// scaled by the single-user rates; every maximizer is Pareto-optimal, so
/// the result tracks nonconvex frontiers that weighted sums would skip.
pub fn refined_boundary(
    sys: &InterferenceSystem,
    res: &GridResolution,
    anchors: &[StrategyProfile],
    opts: &RefineOptions,
) -> Result<ParetoBoundary> {
    let mut tagged = ray_candidates(sys, res, anchors, opts)?;
    let ascent = ascent_options(opts);
    // dips that survived a repair ray are real and not retried
    let mut real: Vec<(f64, f64)> = Vec::new();
    for _ in 0..opts.repair_passes {
        let boundary = filter_tagged(tagged.clone(), BoundaryKind::Refined);
        let pts = boundary.xy();
        let mut dips = dips_above(&boundary, REPAIR_GAP, usize::MAX);
        dips.retain(|&k| !real.contains(&pts[k]));
        dips.truncate(REPAIR_BATCH);
        if dips.is_empty() {
            break;
        }
        tagged.extend(repair_dips(sys, &boundary, &dips, opts.kappa, &ascent)?);
        let after = filter_tagged(tagged.clone(), BoundaryKind::Refined).xy();
        real.extend(dips.iter().map(|&k| pts[k]).filter(|p| after.contains(p)));
    }
    Ok(filter_tagged(tagged, BoundaryKind::Refined).with_meta(
        BoundaryKind::Refined,
        Some(*res),
        false,
    ))
}

/// Whether the refined boundary lies within `rel_eps` times its extent of its concave hull,
/// measured normal to the hull.
///
/// Repairs go to the worst dips first; as soon as a targeted dip survives its
/// repair ray the region is called nonconvex, which keeps clearly nonconvex
/// draws cheap.
pub(crate) fn convex_within(
    sys: &InterferenceSystem,
    res: &GridResolution,
    opts: &RefineOptions,
    rel_eps: f64,
) -> Result<bool> {
    let mut tagged = ray_candidates(sys, res, &[], opts)?;
    let ascent = ascent_options(opts);
    for pass in 0..=VERDICT_PASSES {
        let boundary = filter_tagged(tagged.clone(), BoundaryKind::Refined);
        let scale = boundary.xy().iter().fold(0.0_f64, |m, p| m.max(p.0).max(p.1));
        let tol = rel_eps * scale;
        let dips = dips_above(&boundary, tol, VERDICT_BATCH);
        if dips.is_empty() {
            return Ok(true);
        }
        if pass == VERDICT_PASSES {
            break;
        }
        let worst = boundary.xy()[dips[0]];
        tagged.extend(repair_dips(sys, &boundary, &dips, opts.kappa, &ascent)?);
        let after = filter_tagged(tagged.clone(), BoundaryKind::Refined);
        let pts = after.xy();
        // a dip that is still on the boundary after its repair ray is real
        if pts.contains(&worst) {
            let hull: Vec<(f64, f64)> = upper_hull(&pts).into_iter().map(|i| pts[i]).collect();
            if normal_gaps(&hull, &[worst])[0] > tol {
                return Ok(false);
            }
        }
    }
    Ok(false)
}

/// Gap below the concave hull that is worth another ray.
const REPAIR_GAP: f64 = 1e-4;
/// Dips re-aimed per pass, worst first.
const REPAIR_BATCH: usize = 8;
/// Dips re-aimed per pass by the convexity verdict.
const VERDICT_BATCH: usize = 3;
const VERDICT_PASSES: usize = 12;

/// Boundary indices whose distance below the hull exceeds `tol`, worst first, at most `limit`.
fn dips_above(boundary: &ParetoBoundary, tol: f64, limit: usize) -> Vec<usize> {
    let pts = boundary.xy();
    let hull: Vec<(f64, f64)> = upper_hull(&pts).into_iter().map(|k| pts[k]).collect();
    let gaps = normal_gaps(&hull, &pts);
    let mut dips: Vec<usize> = (0..pts.len()).filter(|&k| gaps[k] > tol).collect();
    dips.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]));
    dips.truncate(limit);
    dips
}

/// Re-aims rays at the hull above the given boundary points.
///
/// On steep stretches a ray that stops a hair short in one rate leaves a large
/// vertical gap, which would read as nonconvexity. Seeds come from the point
/// itself and the bracketing hull vertices, so true dips stay dips.
fn repair_dips(
    sys: &InterferenceSystem,
    boundary: &ParetoBoundary,
    dips: &[usize],
    kappa: f64,
    ascent: &AscentOptions,
) -> Result<Vec<Tagged>> {
    let pts = boundary.xy();
    let strategies = boundary.strategies();
    let hull_idx = upper_hull(&pts);
    let hull: Vec<(f64, f64)> = hull_idx.iter().map(|&k| pts[k]).collect();
    let qs_of = |k: usize| -> Option<Vec<CMat>> {
        strategies[k]
            .as_ref()
            .map(|s| s.covariances().iter().map(|q| q.dm().clone()).collect())
    };
    let mut found = Vec::new();
    for &k in dips {
        let (x, y) = pts[k];
        let a = hull_idx.iter().rev().find(|&&h| h < k).copied();
        let b = hull_idx.iter().find(|&&h| h > k).copied();
        let mut seeds: Vec<Vec<CMat>> = [Some(k), a, b].into_iter().flatten().filter_map(qs_of).collect();
        let mut target = (x, hull_height(&hull, x));
        if let (Some(a), Some(b)) = (a, b) {
            let (pa, pb) = (pts[a], pts[b]);
            let (dx, dy) = (pb.0 - pa.0, pb.1 - pa.1);
            let lam = (((x - pa.0) * dx + (y - pa.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            // nearest point on the hull chord, not the one straight above
            target = (pa.0 + lam * dx, pa.1 + lam * dy);
            if let (Some(qa), Some(qb)) = (qs_of(a), qs_of(b)) {
                seeds.push(qa.iter().zip(&qb).map(|(p, q)| p.scale(1.0 - lam) + q.scale(lam)).collect());
            }
        }
        let dir = [target.0.max(1e-12), target.1.max(1e-12)];
        // start from the seed that is already furthest along the ray
        let score = |qs: &Vec<CMat>| -> Result<f64> {
            let r = rates_dm(sys, &qs.iter().collect::<Vec<_>>())?;
            Ok((r[0] / dir[0]).min(r[1] / dir[1]))
        };
        let mut best: Option<(f64, Vec<CMat>)> = None;
        for qs in seeds {
            let v = score(&qs)?;
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, qs));
            }
        }
        let seeds: Vec<Vec<CMat>> = best.into_iter().map(|b| b.1).collect();
        let mut out = Vec::new();
        sharpened_ray(sys, dir, kappa, seeds, ascent, &mut out)?;
        found.extend(out.into_iter().filter(|p| p.1 > y + REPAIR_GAP || p.0 > x + REPAIR_GAP));
    }
    Ok(found)
}

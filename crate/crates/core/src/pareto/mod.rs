//! Rate regions, Pareto boundaries, convexity and orthogonal-signaling comparators.

mod export;
mod grid;
mod param;
mod refine;
mod sweep;

use serde::{Deserialize, Serialize};

pub use export::boundary_csv;
pub(crate) use grid::{check_grid_dims, frontier_pairs, Candidates, PairTable};
pub use grid::{sample_rate_region, RateRegion};
pub use param::{GridResolution, StrategyParam2x2};
pub use refine::{pure_boundary, refined_boundary, RefineOptions};
pub use sweep::{convexity_probability_sweep, inr_from_ratio_db, region_is_convex, ConvexityCell, SweepOptions};

use crate::equilibrium::{single_user_optimum, water_fill};
use crate::error::{Error, Result};
use crate::linalg::{congruence, CMat};
use crate::model::{InterferenceSystem, RatePoint, StrategyProfile};
use crate::rates::single_user_rate;

/// Dominance tolerance for boundary membership.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Dominance filter over arbitrary points.
    Filtered,
    /// Grid samples only.
    Pure,
    /// Grid-seeded ray optimization.
    Refined,
    TimeSharingHull,
    Tdm,
    Fdm,
    InterferenceCancellation { stage: usize },
}

/// Non-dominated two-user rate points sorted by ascending user-1 rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoBoundary {
    points: Vec<RatePoint>,
    strategies: Vec<Option<StrategyProfile>>,
    kind: BoundaryKind,
    resolution: Option<GridResolution>,
    /// Points between listed vertices are reachable only as average rates.
    averaged: bool,
}

impl ParetoBoundary {
    pub fn points(&self) -> &[RatePoint] {
        &self.points
    }

    pub fn strategies(&self) -> &[Option<StrategyProfile>] {
        &self.strategies
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn resolution(&self) -> Option<GridResolution> {
        self.resolution
    }

    pub fn averaged(&self) -> bool {
        self.averaged
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.get(0), p.get(1))).collect()
    }

    pub(crate) fn with_meta(
        mut self,
        kind: BoundaryKind,
        resolution: Option<GridResolution>,
        averaged: bool,
    ) -> Self {
        self.kind = kind;
        self.resolution = resolution;
        self.averaged = averaged;
        self
    }

    /// Largest user-2 rate the boundary reaches at user-1 rate `x`, by linear interpolation.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let pts = self.xy();
        let first = pts.first()?;
        let last = pts.last()?;
        if x < first.0 || x > last.0 {
            return None;
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if x >= a.0 && x <= b.0 {
                if b.0 == a.0 {
                    return Some(a.1.max(b.1));
                }
                let t = (x - a.0) / (b.0 - a.0);
                return Some(a.1 + t * (b.1 - a.1));
            }
        }
        Some(first.1)
    }

    /// Whether some listed point dominates `r` by more than `tol` in every component.
    pub fn strictly_dominates(&self, r: &RatePoint, tol: f64) -> bool {
        self.points.iter().any(|p| p.strictly_exceeds(r, tol))
    }
}

/// Tagged points through the exact and then tolerance-aware dominance filter.
pub(crate) fn filter_tagged(
    mut pts: Vec<(f64, f64, Option<StrategyProfile>)>,
    kind: BoundaryKind,
) -> ParetoBoundary {
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut kept: Vec<(f64, f64, Option<StrategyProfile>)> = Vec::new();
    let mut best_y = f64::NEG_INFINITY;
    for p in pts {
        if p.1 > best_y {
            best_y = p.1;
            kept.push(p);
        }
    }
    kept.reverse();
    let n = kept.len();
    let tol = DOMINANCE_TOL;
    let mut drop = vec![false; n];
    for i in 0..n {
        let (xi, yi) = (kept[i].0, kept[i].1);
        let mut j = i + 1;
        while j < n && kept[j].1 >= yi - tol {
            if kept[j].0 > xi + tol {
                drop[i] = true;
                break;
            }
            j += 1;
        }
        if drop[i] {
            continue;
        }
        let mut j = i;
        while j > 0 && kept[j - 1].0 >= xi - tol {
            j -= 1;
            if kept[j].1 > yi + tol {
                drop[i] = true;
                break;
            }
        }
    }
    let mut points = Vec::new();
    let mut strategies = Vec::new();
    for (p, d) in kept.into_iter().zip(drop) {
        if !d {
            points.push(RatePoint::from_vec_unchecked(vec![p.0, p.1]));
            strategies.push(p.2);
        }
    }
    ParetoBoundary {
        points,
        strategies,
        kind,
        resolution: None,
        averaged: false,
    }
}

/// Keeps exactly the non-dominated points, sorted by ascending user-1 rate.
pub fn pareto_filter(points: &[RatePoint]) -> Result<ParetoBoundary> {
    if let Some(p) = points.iter().find(|p| p.len() != 2) {
        return Err(Error::UnsupportedDimension(format!(
            "Pareto filtering covers two users, got a {}-component point",
            p.len()
        )));
    }
    Ok(filter_tagged(
        points.iter().map(|p| (p.get(0), p.get(1), None)).collect(),
        BoundaryKind::Filtered,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub convex: bool,
    /// Largest vertical gap between a boundary point and the upper concave hull.
    pub worst_violation: f64,
    /// Largest Euclidean distance from a boundary point up to the hull.
    pub worst_normal_violation: f64,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the upper concave hull vertices of `pts`, which must be sorted by x.
fn upper_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for (k, &p) in pts.iter().enumerate() {
        while h.len() >= 2 && cross(pts[h[h.len() - 2]], pts[h[h.len() - 1]], p) >= 0.0 {
            h.pop();
        }
        h.push(k);
    }
    h
}

fn hull_height(hull: &[(f64, f64)], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x >= a.0 && x <= b.0 {
            let y = if b.0 == a.0 {
                a.1.max(b.1)
            } else {
                a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)
            };
            best = best.max(y);
        }
    }
    if hull.len() == 1 && hull[0].0 == x {
        best = hull[0].1;
    }
    best
}

/// Checks every boundary point against the upper concave hull of the boundary.
///
/// The boundary is closed with its axis projections `(0, y_first)` and
/// `(x_last, 0)`, which never lift the hull above the points but let a single
/// corner point be certified.
pub fn certify_convexity(boundary: &ParetoBoundary, eps: f64) -> Result<ConvexityCertificate> {
    let pts = boundary.xy();
    let mut closed = pts.clone();
    if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
        closed.push((0.0, first.1));
        closed.push((last.0, 0.0));
    }
    closed.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    closed.dedup();
    if closed.len() < 3 {
        return Err(Error::TooFewPoints {
            found: closed.len(),
            required: 3,
        });
    }
    let hull: Vec<(f64, f64)> = upper_hull(&closed).into_iter().map(|k| closed[k]).collect();
    let worst = pts
        .iter()
        .map(|&(x, y)| (hull_height(&hull, x) - y).max(0.0))
        .fold(0.0, f64::max);
    Ok(ConvexityCertificate {
        convex: worst <= eps,
        worst_violation: worst,
        worst_normal_violation: normal_gaps(&hull, &pts).into_iter().fold(0.0, f64::max),
    })
}

/// Distance from each point below the hull polyline to the polyline; zero on or above it.
pub(crate) fn normal_gaps(hull: &[(f64, f64)], pts: &[(f64, f64)]) -> Vec<f64> {
    pts.iter()
        .map(|&p| {
            if hull_height(hull, p.0) <= p.1 {
                return 0.0;
            }
            hull.windows(2)
                .map(|w| {
                    let (a, b) = (w[0], w[1]);
                    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                    let l2 = dx * dx + dy * dy;
                    let t = if l2 > 0.0 {
                        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Upper concave hull vertices of a boundary: the time-sharing frontier.
pub fn time_sharing_hull(boundary: &ParetoBoundary) -> Result<ParetoBoundary> {
    if boundary.is_empty() {
        return Err(Error::TooFewPoints {
            found: 0,
            required: 1,
        });
    }
    let pts = boundary.xy();
    let idx = upper_hull(&pts);
    Ok(ParetoBoundary {
        points: idx.iter().map(|&k| boundary.points[k].clone()).collect(),
        strategies: idx.iter().map(|&k| boundary.strategies[k].clone()).collect(),
        kind: BoundaryKind::TimeSharingHull,
        resolution: boundary.resolution,
        averaged: true,
    })
}

/// Interference-free single-user rates `(R1, R2)` at full power.
pub fn single_user_rates(sys: &InterferenceSystem) -> Result<Vec<f64>> {
    Ok((0..sys.users())
        .map(|i| single_user_rate(sys, &single_user_optimum(sys, i), i))
        .collect())
}

fn linspace(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Time-division line between the two single-user points.
pub fn tdm_boundary(sys: &InterferenceSystem, samples: usize) -> Result<ParetoBoundary> {
    sys.require_two_users("TDM boundary")?;
    let r = single_user_rates(sys)?;
    let points = linspace(samples.max(2))
        .into_iter()
        .map(|t| RatePoint::from_vec_unchecked(vec![t * r[0], (1.0 - t) * r[1]]))
        .collect::<Vec<_>>();
    Ok(ParetoBoundary {
        strategies: vec![None; points.len()],
        points,
        kind: BoundaryKind::Tdm,
        resolution: None,
        averaged: true,
    })
}

/// Rate of user `i` on a band share `beta` with power density boosted by `1/beta`.
fn fdm_rate(sys: &InterferenceSystem, i: usize, beta: f64) -> f64 {
    if beta <= 0.0 {
        return 0.0;
    }
    let rho = sys.rho(i) / beta;
    let gain = congruence(&sys.hm(i, i).adjoint(), &CMat::identity(sys.nr(), sys.nr()), rho);
    let q = water_fill(&gain, sys.p(i));
    let s = congruence(sys.hm(i, i), &q, rho);
    let r = CMat::identity(sys.nr(), sys.nr());
    beta * crate::rates::rate_from_parts(&r, &s).unwrap_or(0.0)
}

/// Frequency-division curve over band shares `beta` in `[0, 1]`.
pub fn fdm_boundary(sys: &InterferenceSystem, samples: usize) -> Result<ParetoBoundary> {
    sys.require_two_users("FDM boundary")?;
    let points = linspace(samples.max(2))
        .into_iter()
        .map(|beta| {
            RatePoint::from_vec_unchecked(vec![fdm_rate(sys, 0, beta), fdm_rate(sys, 1, 1.0 - beta)])
        })
        .collect::<Vec<_>>();
    Ok(ParetoBoundary {
        strategies: vec![None; points.len()],
        points,
        kind: BoundaryKind::Fdm,
        resolution: None,
        averaged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(x: f64, y: f64) -> RatePoint {
        RatePoint::new(vec![x, y]).unwrap()
    }

    #[test]
    fn filter_example() {
        let b = pareto_filter(&[rp(1.0, 1.0), rp(2.0, 0.5), rp(1.5, 1.5)]).unwrap();
        assert_eq!(b.xy(), vec![(1.5, 1.5), (2.0, 0.5)]);
    }

    #[test]
    fn filter_single_point() {
        let b = pareto_filter(&[rp(1.0, 2.0)]).unwrap();
        assert_eq!(b.xy(), vec![(1.0, 2.0)]);
    }

    #[test]
    fn collinear_points_are_convex() {
        let b = pareto_filter(&[rp(0.0, 2.0), rp(1.0, 1.0), rp(2.0, 0.0)]).unwrap();
        let c = certify_convexity(&b, 1e-3).unwrap();
        assert!(c.convex);
        assert_eq!(c.worst_violation, 0.0);
    }

    #[test]
    fn dent_is_detected() {
        let b = pareto_filter(&[rp(0.0, 2.0), rp(1.0, 0.5), rp(2.0, 0.0)]).unwrap();
        let c = certify_convexity(&b, 1e-3).unwrap();
        assert!(!c.convex);
        assert!((c.worst_violation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corner_point_is_convex() {
        let b = pareto_filter(&[rp(3.0, 2.0)]).unwrap();
        assert!(certify_convexity(&b, 1e-3).unwrap().convex);
    }

    #[test]
    fn empty_boundary_has_too_few_points() {
        let b = pareto_filter(&[]).unwrap();
        assert!(matches!(
            certify_convexity(&b, 1e-3),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn hull_of_two_points() {
        let b = pareto_filter(&[rp(0.0, 1.0), rp(1.0, 0.0)]).unwrap();
        let h = time_sharing_hull(&b).unwrap();
        assert_eq!(h.xy(), vec![(0.0, 1.0), (1.0, 0.0)]);
        assert!(h.averaged());
    }
}

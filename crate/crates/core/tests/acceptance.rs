//! Acceptance criteria C1-C11. Prints one PASS/FAIL line per criterion and always exits 0;
//! the lines are the report.

mod common;

use std::f64::consts::LN_2;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratebargain::bargaining::{
    classify_feasible_type, comparator_solutions, existence_sweep, jain_fairness_index, solve_nash_bargaining,
    solve_nash_bargaining_on, ExistenceOptions, FeasibleType, NbMethod, NbOptions,
};
use ratebargain::cancellation::{ic_rate_boundary, ic_stage, monte_carlo_noise_cov};
use ratebargain::cli::main_with_args;
use ratebargain::curvature::{
    constraint_second_derivative, level_scan, nb_objective_second_derivative, utility_second_derivative, ConvexPath,
    LevelScanOptions,
};
use ratebargain::equilibrium::{find_nash_equilibrium, verify_best_response, IwfOptions};
use ratebargain::model::{ComplexMatrix, CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};
use ratebargain::pareto::{
    certify_convexity, convexity_probability_sweep, refined_boundary, GridResolution, RefineOptions, SweepOptions,
};
use ratebargain::rates::{mutual_information, rate_vector, specialized_rate_miso_siso};
use serde_json::Value;

const C1_TOL: f64 = 1e-2;
const C1_TIME: Duration = Duration::from_secs(1);
const C2_TOL: f64 = 1e-2;
const C2_TIME: Duration = Duration::from_secs(60);
const C3_TOL: f64 = 3e-2;
const C4_ON_BOUNDARY: f64 = 1e-3;
const C5_JFI: [f64; 4] = [0.9925, 0.9685, 0.8853, 0.8960];
const C5_JFI_TOL: f64 = 0.01;
const C5_GAIN: f64 = 18.0;
const C5_GAIN_TOL: f64 = 2.0;
const C6_TRIALS: usize = 200;
const C6_THRESHOLDS: [(f64, f64); 3] = [(0.1, 10.0), (5.0, 15.0), (50.0, 20.0)];
const C6_MIN_PROB: f64 = 0.9;
const C6_SLACK: f64 = 0.05;
const C6_TIME: Duration = Duration::from_secs(600);
const C7_INR: f64 = 14.0;
const C7_GAP: f64 = 1e-3;
const C9_SYSTEMS: usize = 20;
const C9_GRID_SLACK: f64 = 1e-6;
const C9_NP_REL: f64 = 1e-3;
const C9_FD_REL: f64 = 1e-4;
const C9_FD_STEP: f64 = 1e-3;
const C10_SAMPLES: usize = 100_000;
const C10_SIGMA: f64 = 3.0;
const C11_INSTANCES: usize = 50;
const C11_TOL: f64 = 1e-12;

type Outcome = (bool, String);

fn report(id: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
    let elapsed = start.elapsed().as_secs_f64();
    match result {
        Ok((ok, detail)) => println!("{} {id} ({elapsed:.1}s): {detail}", if ok { "PASS" } else { "FAIL" }),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            println!("FAIL {id} ({elapsed:.1}s): panicked: {msg}");
        }
    }
}

fn cli(args: &[&str], out: &Path) -> i32 {
    let mut all = vec!["ratebargain"];
    all.extend_from_slice(args);
    let out = out.to_str().unwrap();
    all.extend_from_slice(&["--out", out]);
    main_with_args(all)
}

fn json_matrix(v: &Value) -> [[f64; 2]; 2] {
    let e = |r: usize, c: usize| v[r][c][0].as_f64().unwrap();
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn max_diff(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            m = m.max((a[r][c] - b[r][c]).abs());
        }
    }
    m
}

fn real_entries(q: &CovarianceMatrix) -> [[f64; 2]; 2] {
    [[q.get(0, 0).re, q.get(0, 1).re], [q.get(1, 0).re, q.get(1, 1).re]]
}

fn fmt_m(m: [[f64; 2]; 2]) -> String {
    format!("[[{:.3},{:.3}],[{:.3},{:.3}]]", m[0][0], m[0][1], m[1][0], m[1][1])
}

fn c1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture_path("fig2");
    let start = Instant::now();
    let code = cli(&["ne", "--scenario", path.to_str().unwrap()], dir.path());
    let elapsed = start.elapsed();
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ne.json")).unwrap()).unwrap();
    let q1 = json_matrix(&v["profile"][0]);
    let q2 = json_matrix(&v["profile"][1]);
    let want1 = [[0.25, 0.0], [0.0, 0.75]];
    let want2 = [[0.75, 0.0], [0.0, 0.25]];
    let err = max_diff(q1, want1).max(max_diff(q2, want2));
    let swapped = max_diff(q1, want2).max(max_diff(q2, want1));
    (
        code == 0 && err <= C1_TOL && elapsed < C1_TIME,
        format!(
            "Q1={} Q2={} max err {err:.3} (tol {C1_TOL}), err against swapped users {swapped:.3}, {:.3}s",
            fmt_m(q1),
            fmt_m(q2),
            elapsed.as_secs_f64()
        ),
    )
}

fn c2() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture_path("fig2");
    let start = Instant::now();
    let code = cli(&["nb", "--scenario", path.to_str().unwrap()], dir.path());
    let elapsed = start.elapsed();
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("nb.json")).unwrap()).unwrap();
    let q1 = json_matrix(&v["profile"][0]);
    let q2 = json_matrix(&v["profile"][1]);
    let err = max_diff(q1, [[1.0, 0.0], [0.0, 0.0]]).max(max_diff(q2, [[0.0, 0.0], [0.0, 1.0]]));
    let types = v["feasible_types"].clone();
    let type_ok = types == serde_json::json!(["TypeI", "TypeI"]);
    (
        code == 0 && v["exists"] == true && err <= C2_TOL && type_ok && elapsed < C2_TIME,
        format!(
            "Q1={} Q2={} max err {err:.2e} (tol {C2_TOL}), types {types}, {:.2}s",
            fmt_m(q1),
            fmt_m(q2),
            elapsed.as_secs_f64()
        ),
    )
}

fn nb_for(name: &str) -> (InterferenceSystem, ratebargain::equilibrium::IwfReport, ratebargain::bargaining::BargainingOutcome) {
    let sys = fixture(name);
    let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
    let nb = solve_nash_bargaining(&sys, &ne, &NbOptions::default()).unwrap();
    (sys, ne, nb)
}

fn c3() -> Outcome {
    let (_, ne, nb) = nb_for("fig4");
    let want = [[0.02, 0.15], [0.15, 0.98]];
    let q: Vec<[[f64; 2]; 2]> = nb.profile.covariances().iter().map(real_entries).collect();
    let imag = nb.profile.covariances().iter().map(|c| c.get(0, 1).im.abs()).fold(0.0, f64::max);
    let err = q.iter().map(|m| max_diff(*m, want)).fold(0.0, f64::max).max(imag);
    let types = classify_feasible_type(&ne.profile, &nb.profile, 5.0).unwrap();
    let ok = nb.exists && err <= C3_TOL && types == [FeasibleType::TypeII, FeasibleType::TypeII];
    (ok, format!("Q1={} Q2={} max err {err:.3} (tol {C3_TOL}), types {types:?}", fmt_m(q[0]), fmt_m(q[1])))
}

fn c4() -> Outcome {
    let sys = fixture("fig5");
    let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
    let opts = NbOptions::default();
    let boundary = refined_boundary(&sys, &opts.resolution, std::slice::from_ref(&ne.profile), &opts.refine).unwrap();
    let nb = solve_nash_bargaining_on(&sys, &ne, Some(&boundary), &opts).unwrap();
    let cert = certify_convexity(&boundary, 1e-3).unwrap();
    let (x, y) = (nb.rates.get(0), nb.rates.get(1));
    let gap = boundary.interpolate(x).map(|b| b - y).unwrap_or(f64::NAN);
    let on_boundary = gap.abs() <= C4_ON_BOUNDARY * (1.0 + y);
    let types = classify_feasible_type(&ne.profile, &nb.profile, 5.0).unwrap();
    let ok = nb.exists && on_boundary && !cert.convex && types == [FeasibleType::TypeII, FeasibleType::TypeIII];
    (
        ok,
        format!(
            "NB rates ({x:.4}, {y:.4}), boundary gap {gap:.2e}, nonconvex={} (violation {:.3}), types {types:?}",
            !cert.convex, cert.worst_violation
        ),
    )
}

fn c5() -> Outcome {
    let sys = fixture("fig3");
    let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
    let opts = NbOptions::default();
    let boundary = refined_boundary(&sys, &opts.resolution, std::slice::from_ref(&ne.profile), &opts.refine).unwrap();
    let nb = solve_nash_bargaining_on(&sys, &ne, Some(&boundary), &opts).unwrap();
    let comps = comparator_solutions(&sys, &boundary, &ne).unwrap();
    let eg = comps[1].rates.clone();
    let jfi = |r: &RatePoint| jain_fairness_index(r.rates(), eg.rates()).unwrap();
    let got = [jfi(&ne.rates_at_ne), jfi(&nb.rates), jfi(&comps[2].rates), jfi(&comps[3].rates)];
    let jfi_ok = got.iter().zip(C5_JFI).all(|(g, w)| (g - w).abs() <= C5_JFI_TOL);
    let gain = 100.0 * (nb.rates.sum() / ne.rates_at_ne.sum() - 1.0);
    let gain_ok = (gain - C5_GAIN).abs() <= C5_GAIN_TOL;
    (
        jfi_ok && gain_ok,
        format!(
            "JFI NE/NB/KS/Util = {:.4}/{:.4}/{:.4}/{:.4} (expected {:?}, within {C5_JFI_TOL}: {jfi_ok}); \
             sum-rate gain {gain:.2}% (target {C5_GAIN} +- {C5_GAIN_TOL}: {gain_ok})",
            got[0], got[1], got[2], got[3], C5_JFI
        ),
    )
}

fn c6() -> Outcome {
    let snrs: Vec<f64> = C6_THRESHOLDS.iter().map(|t| t.0).collect();
    let dbs: Vec<f64> = (0..=6).map(|k| 5.0 * k as f64).collect();
    let start = Instant::now();
    let cells = convexity_probability_sweep(&snrs, &dbs, C6_TRIALS, 2024, &SweepOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let mut ok = elapsed < C6_TIME;
    let mut parts = Vec::new();
    for (k, &(snr, db)) in C6_THRESHOLDS.iter().enumerate() {
        let row = &cells[k * dbs.len()..(k + 1) * dbs.len()];
        let at = row.iter().filter(|c| c.snr_inr_db >= db).map(|c| c.probability).fold(1.0, f64::min);
        let monotone = row.windows(2).all(|w| w[1].probability >= w[0].probability - C6_SLACK);
        ok &= at >= C6_MIN_PROB && monotone;
        let probs: Vec<String> = row.iter().map(|c| format!("{:.2}", c.probability)).collect();
        parts.push(format!("SNR {snr}: [{}] min at >= {db} dB {at:.2}, monotone {monotone}", probs.join(" ")));
    }
    (ok, format!("{}; {:.0}s", parts.join("; "), elapsed.as_secs_f64()))
}

fn c7() -> Outcome {
    let sys = fixture("fig4");
    let opts = ExistenceOptions {
        iwf: IwfOptions::default(),
        nb: NbOptions::coarse(),
    };
    let low = [1.0, 2.0, 5.0, 10.0, 14.0];
    let high = [250.0, 300.0, 500.0];
    let snrs: Vec<f64> = low.iter().chain(high.iter()).copied().collect();
    let slice = existence_sweep(&sys, &snrs, &[C7_INR], &opts);
    let gap = |p: &ratebargain::bargaining::ExistencePoint| match (&p.ne_rates, &p.nb_rates) {
        (Some(a), Some(b)) => (0..2).map(|i| (a.get(i) - b.get(i)).abs()).fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    let coincide: Vec<String> = slice.iter().map(|p| format!("{}:{:.3}", p.snr, gap(p))).collect();
    let thresholds_ok = slice.iter().all(|p| gap(p) < C7_GAP);

    let levels = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0];
    let grid = existence_sweep(&sys, &levels, &levels, &opts);
    let violations: Vec<String> = grid
        .iter()
        .filter(|p| p.exists && p.inr >= p.snr)
        .map(|p| format!("({},{})", p.snr, p.inr))
        .collect();
    let errors = grid.iter().filter(|p| p.error.is_some()).count();
    let exist = grid.iter().filter(|p| p.exists).count();
    let grid_ok = violations.is_empty() && errors == 0;
    (
        thresholds_ok && grid_ok,
        format!(
            "INR {C7_INR} max |NE-NB| per SNR [{}] (need < {C7_GAP}); level grid: NB exists at {exist}/{}, \
             {} with INR >= SNR, {errors} errors",
            coincide.join(" "),
            grid.len(),
            violations.len()
        ),
    )
}

fn c8() -> Outcome {
    let sys = fixture("fig2");
    let levels = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0];
    let opts = LevelScanOptions {
        iwf: IwfOptions::default(),
        nb: NbOptions::coarse(),
    };
    let cells = level_scan(&sys, &levels, &levels, 0.5, &opts);
    let nb_points: Vec<_> = cells.iter().filter(|c| c.nb_exists).collect();
    let evaluated: Vec<_> = nb_points.iter().filter_map(|c| c.terms.as_ref().map(|t| (c, t))).collect();
    let missing = nb_points.len() - evaluated.len();
    let positive: Vec<String> = evaluated
        .iter()
        .filter(|(_, t)| !(t.f_second < 0.0))
        .map(|(c, t)| format!("({},{}):{:.3}", c.snr, c.inr, t.f_second))
        .collect();
    let inside = evaluated.iter().filter(|(_, t)| t.all_t_positive()).count();
    let worst = evaluated.iter().map(|(_, t)| t.f_second).fold(f64::NEG_INFINITY, f64::max);
    (
        missing == 0 && positive.is_empty() && !evaluated.is_empty(),
        format!(
            "{} NB points of {}, f''(0.5) < 0 at {}/{} (max {worst:.3}) [nonnegative: {}], {missing} not evaluated; \
             midpoint inside the bargaining set at {inside}/{}",
            nb_points.len(),
            cells.len(),
            evaluated.len() - positive.len(),
            evaluated.len(),
            positive.join(" "),
            evaluated.len()
        ),
    )
}

fn random_diag(rng: &mut ChaCha8Rng) -> ([[f64; 2]; 4], f64, f64) {
    let mut h = [[0.0; 2]; 4];
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.random_range(0.2..2.0);
        }
    }
    (h, rng.random_range(1.0..30.0), rng.random_range(0.5..20.0))
}

fn second_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let d = |h: f64| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    (4.0 * d(C9_FD_STEP / 2.0) - d(C9_FD_STEP)) / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut br_worst, mut np_worst, mut fd_worst) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut exist_mismatch = 0;
    let mut with_nb = 0;
    for _ in 0..C9_SYSTEMS {
        let (h, rho, eta) = random_diag(&mut rng);
        let sys = diag_system(h, rho, eta);
        let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
        for i in 0..2 {
            br_worst = br_worst.max(verify_best_response(&sys, &ne.profile, i, &GridResolution::oracle(9)).unwrap());
        }
        let grid = solve_nash_bargaining(&sys, &ne, &NbOptions { method: NbMethod::Grid, ..NbOptions::default() }).unwrap();
        let ascent = solve_nash_bargaining(
            &sys,
            &ne,
            &NbOptions {
                method: NbMethod::ProjectedAscent,
                ..NbOptions::default()
            },
        )
        .unwrap();
        if grid.exists != ascent.exists {
            exist_mismatch += 1;
        } else if grid.exists {
            with_nb += 1;
            let (a, b) = (grid.objective_value, ascent.objective_value);
            np_worst = np_worst.max((a - b).abs() / a.max(b));
        }

        // curvature along a path between random feasible profiles
        let cov = |rng: &mut ChaCha8Rng| {
            let s: f64 = rng.random_range(0.0..1.0);
            let c: f64 = rng.random_range(0.3..1.0);
            CovarianceMatrix::diag(&[c * s, c * (1.0 - s)]).unwrap()
        };
        let x = StrategyProfile::new(&sys, vec![cov(&mut rng), cov(&mut rng)]).unwrap();
        let z = StrategyProfile::new(&sys, vec![cov(&mut rng), cov(&mut rng)]).unwrap();
        let path = ConvexPath::new(&sys, x, z).unwrap();
        let t = rng.random_range(0.2..0.8);
        let lo: Vec<f64> = (0..2)
            .map(|i| {
                (0..=10)
                    .map(|k| mutual_information(&sys, &path.at(k as f64 / 10.0), i).unwrap())
                    .fold(f64::INFINITY, f64::min)
                    * 0.5
            })
            .collect();
        let d = RatePoint::new(lo.clone()).unwrap();
        let f = |s: f64| {
            let r = rate_vector(&sys, &path.at(s)).unwrap();
            (0..2).map(|i| (r.get(i) - lo[i]).ln()).sum::<f64>()
        };
        let c = nb_objective_second_derivative(&sys, &path, t, &d).unwrap();
        fd_worst = fd_worst.max(rel(c.f_second, second_difference(f, t)));
        for i in 0..2 {
            let fi = utility_second_derivative(&sys, &path, t, i).unwrap();
            let numeric = second_difference(|s| mutual_information(&sys, &path.at(s), i).unwrap(), t);
            fd_worst = fd_worst.max(rel(fi, numeric));
            let hi = constraint_second_derivative(&sys, &path, t, i).unwrap();
            fd_worst = fd_worst.max(rel(hi, -LN_2 * numeric));
        }
    }
    let ok = br_worst <= C9_GRID_SLACK && exist_mismatch == 0 && np_worst <= C9_NP_REL && fd_worst <= C9_FD_REL;
    (
        ok,
        format!(
            "(a) worst grid best-response gain {br_worst:.1e} (slack {C9_GRID_SLACK}); (b) NB in {with_nb}/{C9_SYSTEMS}, \
             existence mismatches {exist_mismatch}, worst Nash-product disagreement {np_worst:.1e} (tol {C9_NP_REL}); \
             (c) worst finite-difference error {fd_worst:.1e} (tol {C9_FD_REL})"
        ),
    )
}

fn c10() -> Outcome {
    let mut worst_z: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = Vec::new();
    for name in ["fig2", "fig3", "fig4", "fig5"] {
        let sys = fixture(name);
        for stage in 2..=3 {
            match ic_stage(&sys, stage, &StrategyProfile::uniform(&sys)) {
                Ok(links) => {
                    for (user, link) in links.iter().enumerate() {
                        let est = monte_carlo_noise_cov(&sys, stage, user, C10_SAMPLES, 7).unwrap();
                        worst_z = worst_z.max(est.max_z_score(&link.noise_cov));
                        checked += 1;
                    }
                }
                Err(e) => skipped.push(format!("{name} stage {stage}: {e}")),
            }
        }
    }
    let mc_ok = worst_z < C10_SIGMA && checked > 0;

    let sys = fixture("fig2");
    let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
    let pure = refined_boundary(&sys, &GridResolution::default(), &[ne.profile], &RefineOptions::default()).unwrap();
    let ic = ic_rate_boundary(&sys, 3, &GridResolution::default(), &RefineOptions::default()).unwrap();
    let corner = ic.xy()[0];
    let beaten: Vec<(f64, f64)> = pure
        .xy()
        .into_iter()
        .filter(|p| !(corner.0 >= p.0 - 1e-9 && corner.1 >= p.1 - 1e-9))
        .collect();
    let dom_ok = beaten.is_empty();
    let example = beaten
        .iter()
        .max_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
        .map(|p| format!(", e.g. pure point ({:.3}, {:.3})", p.0, p.1))
        .unwrap_or_default();
    (
        mc_ok && dom_ok && skipped.is_empty(),
        format!(
            "MC: {checked} noise covariances, worst z {worst_z:.2} (need < {C10_SIGMA}); not computable: [{}]; \
             stage-3 corner ({:.4}, {:.4}) dominates the pure boundary: {dom_ok} ({} of {} points above it{example})",
            skipped.join("; "),
            corner.0,
            corner.1,
            beaten.len(),
            pure.len()
        ),
    )
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst: f64 = 0.0;
    for k in 0..C11_INSTANCES {
        let nt = if k % 2 == 0 { 2 } else { 1 };
        let mut m = || {
            let e = (0..nt).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            ComplexMatrix::new(1, nt, e).unwrap()
        };
        let h = [m(), m(), m(), m()];
        let rho = rng.random_range(0.1..50.0);
        let eta = rng.random_range(0.0..50.0);
        let sys = InterferenceSystem::two_user(h[0].clone(), h[1].clone(), h[2].clone(), h[3].clone(), rho, eta).unwrap();
        let mut cov = || {
            let g: Vec<Complex64> =
                (0..nt * nt).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let g = ComplexMatrix::new(nt, nt, g).unwrap().into_dmatrix();
            let a = &g * g.adjoint();
            let s = rng.random_range(0.1..1.0) / a.trace().re;
            CovarianceMatrix::new(ComplexMatrix::from_dmatrix(a.map(|z| z * s)).unwrap()).unwrap()
        };
        let profile = StrategyProfile::new(&sys, vec![cov(), cov()]).unwrap();
        for i in 0..2 {
            let general = mutual_information(&sys, &profile, i).unwrap();
            let special = specialized_rate_miso_siso(&sys, &profile, i).unwrap();
            worst = worst.max((general - special).abs());
        }
    }
    (worst <= C11_TOL, format!("{C11_INSTANCES} instances, worst |specialized - general| {worst:.1e} (tol {C11_TOL})"))
}

fn main() {
    println!("acceptance criteria");
    report("C1 NE fixture (fig2)", c1);
    report("C2 NB fixture (fig2)", c2);
    report("C3 NB fixture (fig4)", c3);
    report("C4 NB fixture (fig5)", c4);
    report("C5 fairness", c5);
    report("C6 convexity sweep", c6);
    report("C7 existence thresholds", c7);
    report("C8 curvature", c8);
    report("C9 oracle equivalence", c9);
    report("C10 interference cancellation", c10);
    report("C11 MISO/SISO degeneracy", c11);
}

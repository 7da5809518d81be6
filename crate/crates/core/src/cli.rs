//! Scenario-driven command-line front end.
//!
//! Every CSV gets a `<name>.meta.json` sidecar with the run configuration. Outputs carry no
//! timestamps, so identical inputs give identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bargaining::{
    classify_feasible_type, comparator_solutions, existence_sweep, jain_fairness_index, nash_curve,
    solve_nash_bargaining_on, BargainingOutcome, ExistenceOptions, NbOptions,
};
use crate::cancellation::ic_rate_boundary;
use crate::curvature::{boundary_path, curvature_scan, level_scan, LevelScanOptions, CONCAVITY_TOL};
use crate::equilibrium::{find_nash_equilibrium, IwfOptions, IwfReport};
use crate::error::{Error, Result};
use crate::model::{load_scenario, InterferenceSystem};
use crate::pareto::{
    boundary_csv, certify_convexity, convexity_probability_sweep, fdm_boundary, inr_from_ratio_db,
    refined_boundary, tdm_boundary, time_sharing_hull, GridResolution, ParetoBoundary, RefineOptions,
    SweepOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

pub const ANGLE_TOL_DEG: f64 = 5.0;
const ORTHOGONAL_SAMPLES: usize = 101;
const NASH_CURVE_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ne,
    Nb,
    Boundary,
    ConvexitySweep,
    ExistenceSweep,
    Curvature,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ratebargain", version, about = "Rate regions, equilibria and bargaining for MIMO interference systems")]
pub struct Cli {
    pub command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Points per axis of the covariance parameter grid.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Coarser refinement; restricted rotations on real diagonal channels.
    #[arg(long)]
    pub fast: bool,
    /// Interference-cancellation stage for the boundary command.
    #[arg(long)]
    pub stage: Option<usize>,
    /// SNR values as `a:b:step` or a comma list.
    #[arg(long)]
    pub snr_grid: Option<String>,
    /// INR values as `a:b:step` or a comma list; SNR/INR in dB for convexity-sweep.
    #[arg(long)]
    pub inr_grid: Option<String>,
    /// Monte-Carlo trials per cell for convexity-sweep.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Tolerance overrides: iwf, iwf_max_iter, strict, eps, angle, t.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub scenario_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub resolution: Option<usize>,
    pub fast_mode: bool,
    pub stage: Option<usize>,
    pub snr_grid: Option<Vec<f64>>,
    pub inr_grid: Option<Vec<f64>>,
    pub trials: usize,
    pub tolerances: BTreeMap<String, f64>,
}

const TOL_KEYS: [&str; 6] = ["iwf", "iwf_max_iter", "strict", "eps", "angle", "t"];

fn invalid(field: &str, found: &str, expected: &str) -> Error {
    Error::ShapeMismatch {
        field: field.into(),
        expected: expected.into(),
        found: found.into(),
    }
}

/// Parses `a:b:step` (inclusive of `b`) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| invalid("grid", spec, "a:b:step or a comma list of numbers"))
    };
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) {
                return Err(Error::NonPositiveParameter {
                    field: "grid step".into(),
                    requirement: "positive",
                    value: step,
                });
            }
            let n = ((b - a) / step + 1e-9).floor();
            if n < 0.0 {
                return Ok(Vec::new());
            }
            Ok((0..=n as usize).map(|k| a + k as f64 * step).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(invalid("grid", spec, "a:b:step or a comma list of numbers")),
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut tolerances = BTreeMap::new();
        for item in &cli.tol {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| invalid("tol", item, "KEY=VAL"))?;
            let k = k.trim();
            if !TOL_KEYS.contains(&k) {
                return Err(invalid("tol", k, &TOL_KEYS.join(", ")));
            }
            let v: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v > 0.0)
                .ok_or_else(|| invalid("tol", item, "a positive number"))?;
            tolerances.insert(k.to_string(), v);
        }
        if let Some(r) = cli.resolution {
            if r < 2 {
                return Err(Error::NonPositiveParameter {
                    field: "resolution".into(),
                    requirement: "at least 2",
                    value: r as f64,
                });
            }
        }
        if cli.trials == 0 {
            return Err(Error::NonPositiveParameter {
                field: "trials".into(),
                requirement: "positive",
                value: 0.0,
            });
        }
        Ok(Self {
            command: cli.command,
            scenario_path: cli.scenario,
            output_dir: cli.out,
            seed: cli.seed,
            resolution: cli.resolution,
            fast_mode: cli.fast,
            stage: cli.stage,
            snr_grid: cli.snr_grid.as_deref().map(parse_grid).transpose()?,
            inr_grid: cli.inr_grid.as_deref().map(parse_grid).transpose()?,
            trials: cli.trials,
            tolerances,
        })
    }

    fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    fn iwf(&self) -> IwfOptions {
        let d = IwfOptions::default();
        IwfOptions {
            tol: self.tol("iwf", d.tol),
            max_iter: self.tol("iwf_max_iter", d.max_iter as f64) as usize,
            ..d
        }
    }

    fn resolution_for(&self, sys: &InterferenceSystem) -> GridResolution {
        match self.resolution {
            Some(n) if self.fast_mode => GridResolution::fast(n),
            Some(n) => GridResolution::uniform(n),
            None => GridResolution::for_system(sys, self.fast_mode),
        }
    }

    fn refine(&self) -> RefineOptions {
        if self.fast_mode {
            RefineOptions::coarse()
        } else {
            RefineOptions::default()
        }
    }

    fn nb(&self, sys: &InterferenceSystem) -> NbOptions {
        let base = if self.fast_mode {
            NbOptions::coarse()
        } else {
            NbOptions::default()
        };
        NbOptions {
            resolution: self.resolution_for(sys),
            refine: self.refine(),
            strict_tol: self.tol("strict", base.strict_tol),
            ..base
        }
    }

    fn scenario(&self) -> Result<InterferenceSystem> {
        let path = self
            .scenario_path
            .as_ref()
            .ok_or_else(|| invalid("scenario", "none", "--scenario PATH"))?;
        load_scenario(path)
    }
}

/// Files written by one command.
pub struct Outputs {
    dir: PathBuf,
    meta: Value,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    fn new(config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&config.output_dir)?;
        Ok(Self {
            dir: config.output_dir.clone(),
            meta: json!({
                "tool": "ratebargain",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "decisions": {
                    "fdm_rate": "band share beta, full power water-filled at SNR rho/beta, rate scaled by beta",
                    "rates": "log2 det via Cholesky",
                    "boundary": "grid samples refined by soft-min ray ascent",
                    "projection": "Euclidean onto {Q psd, tr Q <= p}",
                    "nb_objective": "sum_i ln(I_i - I_i^NE), rates in bits",
                    "jfi_optimal": "egalitarian rates",
                },
            }),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        self.write(name, &(text + "\n"))
    }

    fn csv(&mut self, name: &str, body: &str, extra: Value) -> Result<()> {
        self.write(name, body)?;
        let mut meta = self.meta.clone();
        meta["file"] = json!(name);
        meta["details"] = extra;
        self.json(&format!("{name}.meta.json"), &meta)
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn ne_json(ne: &IwfReport) -> Value {
    json!({
        "profile": ne.profile,
        "rates": ne.rates_at_ne,
        "iterations": ne.iterations,
        "converged": ne.converged,
        "final_change": ne.final_change,
        "schedule": ne.schedule,
        "tol": ne.tol,
    })
}

fn summary(ne: &IwfReport) -> String {
    let mut s = format!(
        "NE: converged={} after {} sweeps, rates [{}] bits\n",
        ne.converged,
        ne.iterations,
        ne.rates_at_ne.rates().iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
    );
    for (i, q) in ne.profile.covariances().iter().enumerate() {
        let _ = writeln!(s, "  Q{} eigenvalues {:?}", i + 1, q.eig().values);
    }
    s
}

fn not_converged(ne: &IwfReport) -> Error {
    Error::NotConverged(format!(
        "iterative water-filling stopped after {} sweeps with change {:e}",
        ne.iterations, ne.final_change
    ))
}

pub fn cmd_ne(config: &RunConfig) -> Result<Outputs> {
    let sys = config.scenario()?;
    let ne = find_nash_equilibrium(&sys, None, &config.iwf())?;
    let mut out = Outputs::new(config)?;
    out.json("ne.json", &ne_json(&ne))?;
    print!("{}", summary(&ne));
    if !ne.converged {
        return Err(not_converged(&ne));
    }
    Ok(out)
}

fn solve_nb(config: &RunConfig, sys: &InterferenceSystem) -> Result<(IwfReport, Option<ParetoBoundary>, BargainingOutcome)> {
    let ne = find_nash_equilibrium(sys, None, &config.iwf())?;
    if !ne.converged {
        return Err(not_converged(&ne));
    }
    let opts = config.nb(sys);
    let boundary = if sys.users() == 2 && sys.nt() <= 2 && sys.nr() <= 2 {
        Some(refined_boundary(sys, &opts.resolution, std::slice::from_ref(&ne.profile), &opts.refine)?)
    } else {
        None
    };
    let nb = solve_nash_bargaining_on(sys, &ne, boundary.as_ref(), &opts)?;
    Ok((ne, boundary, nb))
}

pub fn cmd_nb(config: &RunConfig) -> Result<Outputs> {
    let sys = config.scenario()?;
    let (ne, _, nb) = solve_nb(config, &sys)?;
    let types = if nb.exists {
        Some(classify_feasible_type(&ne.profile, &nb.profile, config.tol("angle", ANGLE_TOL_DEG))?)
    } else {
        None
    };
    let mut out = Outputs::new(config)?;
    out.json(
        "nb.json",
        &json!({
            "exists": nb.exists,
            "profile": nb.profile,
            "rates": nb.rates,
            "nash_product": nb.objective_value,
            "feasible_types": types,
            "ne_rates": ne.rates_at_ne,
            "diagnostics": nb.diagnostics,
        }),
    )?;
    let mut curve = String::from("I1_bits,I2_bits\n");
    if nb.exists {
        for (x, y) in nash_curve(&ne.rates_at_ne, nb.objective_value, NASH_CURVE_SAMPLES)? {
            let _ = writeln!(curve, "{},{}", num(x), num(y));
        }
    }
    out.csv("nash_curve.csv", &curve, json!({ "nash_product": nb.objective_value, "exists": nb.exists }))?;
    print!("{}", summary(&ne));
    println!(
        "NB: exists={} rates [{}] Nash product {:.6} types {:?}",
        nb.exists,
        nb.rates.rates().iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", "),
        nb.objective_value,
        types
    );
    Ok(out)
}

fn write_boundary(out: &mut Outputs, name: &str, b: &ParetoBoundary, stage: Option<usize>) -> Result<()> {
    let (csv, strategies) = boundary_csv(b, stage);
    let cert = certify_convexity(b, 1e-3).ok();
    out.csv(
        name,
        &csv,
        json!({ "kind": b.kind(), "averaged": b.averaged(), "convexity": cert, "strategies": strategies }),
    )
}

pub fn cmd_boundary(config: &RunConfig) -> Result<Outputs> {
    let sys = config.scenario()?;
    sys.require_two_users("boundary")
        .map_err(|_| Error::UnsupportedDimension(format!("boundary needs 2 users, scenario has {}", sys.users())))?;
    let (ne, boundary, nb) = solve_nb(config, &sys)?;
    let pure = boundary.ok_or_else(|| {
        Error::UnsupportedDimension(format!("boundary grid needs Nt, Nr <= 2, got {}x{}", sys.nr(), sys.nt()))
    })?;
    let mut out = Outputs::new(config)?;
    write_boundary(&mut out, "boundary_pure.csv", &pure, None)?;
    write_boundary(&mut out, "boundary_hull.csv", &time_sharing_hull(&pure)?, None)?;
    write_boundary(&mut out, "boundary_tdm.csv", &tdm_boundary(&sys, ORTHOGONAL_SAMPLES)?, None)?;
    write_boundary(&mut out, "boundary_fdm.csv", &fdm_boundary(&sys, ORTHOGONAL_SAMPLES)?, None)?;
    if let Some(stage) = config.stage {
        let opts = config.nb(&sys);
        let ic = ic_rate_boundary(&sys, stage, &opts.resolution, &opts.refine)?;
        write_boundary(&mut out, "boundary_ic.csv", &ic, Some(stage))?;
    }

    let comps = comparator_solutions(&sys, &pure, &ne)?;
    let optimal = comps
        .iter()
        .find(|c| c.kind == crate::bargaining::SolutionKind::Egalitarian)
        .map(|c| c.rates.rates().to_vec())
        .expect("comparators include the egalitarian solution");
    let mut rows = vec![&comps[0], &nb];
    rows.extend(comps[1..].iter());
    let mut csv = String::from("kind,I1,I2,objective,JFI,exists\n");
    for s in &rows {
        let jfi = jain_fairness_index(s.rates.rates(), &optimal).ok();
        let kind = serde_json::to_value(s.kind).expect("kind serializes");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            kind.as_str().unwrap_or_default(),
            num(s.rates.get(0)),
            num(s.rates.get(1)),
            num(s.objective_value),
            opt_num(jfi),
            s.exists
        );
    }
    let interpolated: Vec<Value> = rows.iter().map(|s| json!(s.diagnostics.interpolated)).collect();
    out.csv("solutions.csv", &csv, json!({ "interpolated": interpolated }))?;
    println!("boundary: {} pure points, NB exists={}", pure.len(), nb.exists);
    Ok(out)
}

pub fn cmd_convexity_sweep(config: &RunConfig) -> Result<Outputs> {
    let snrs = config.snr_grid.clone().unwrap_or_else(|| vec![0.1, 5.0, 50.0]);
    let dbs = config
        .inr_grid
        .clone()
        .unwrap_or_else(|| (0..=6).map(|k| 5.0 * k as f64).collect());
    let opts = SweepOptions {
        eps: config.tol("eps", SweepOptions::default().eps),
        resolution: config.resolution.map(GridResolution::uniform).unwrap_or(SweepOptions::default().resolution),
        ..SweepOptions::default()
    };
    let cells = convexity_probability_sweep(&snrs, &dbs, config.trials, config.seed, &opts)?;
    let mut csv = String::from("snr,snr_inr_db,inr,trials,convex,probability\n");
    for c in &cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(c.snr),
            num(c.snr_inr_db),
            num(inr_from_ratio_db(c.snr, c.snr_inr_db)),
            c.trials,
            c.convex,
            num(c.probability)
        );
    }
    let mut out = Outputs::new(config)?;
    out.csv("convexity.csv", &csv, json!({ "sweep": opts }))?;
    println!("convexity sweep: {} cells x {} trials", cells.len(), config.trials);
    Ok(out)
}

fn default_levels() -> Vec<f64> {
    vec![1.0, 2.0, 5.0, 10.0, 14.0, 20.0, 50.0, 100.0, 230.0, 500.0]
}

fn nearest(values: &[f64], target: f64) -> Option<f64> {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

pub fn cmd_existence_sweep(config: &RunConfig) -> Result<Outputs> {
    let sys = config.scenario()?;
    sys.require_two_users("existence sweep")
        .map_err(|_| Error::UnsupportedDimension(format!("existence sweep needs 2 users, scenario has {}", sys.users())))?;
    let snrs = config.snr_grid.clone().unwrap_or_else(default_levels);
    let inrs = config.inr_grid.clone().unwrap_or_else(default_levels);
    let opts = ExistenceOptions {
        iwf: config.iwf(),
        nb: config.nb(&sys),
    };
    let points = existence_sweep(&sys, &snrs, &inrs, &opts);
    let header = "snr,inr,exists,regime,ne_I1,ne_I2,nb_I1,nb_I2\n";
    let row = |p: &crate::bargaining::ExistencePoint| {
        let r = |v: &Option<crate::model::RatePoint>, i: usize| opt_num(v.as_ref().map(|r| r.get(i)));
        format!(
            "{},{},{},{},{},{},{},{}\n",
            num(p.snr),
            num(p.inr),
            p.exists,
            p.regime.map(|g| g.as_str()).unwrap_or_default(),
            r(&p.ne_rates, 0),
            r(&p.ne_rates, 1),
            r(&p.nb_rates, 0),
            r(&p.nb_rates, 1)
        )
    };
    let failures: Vec<Value> = points
        .iter()
        .filter_map(|p| p.error.as_ref().map(|e| json!({ "snr": p.snr, "inr": p.inr, "error": e })))
        .collect();
    for f in &failures {
        eprintln!("existence sweep point failed: {f}");
    }
    let mut out = Outputs::new(config)?;
    let all: String = std::iter::once(header.to_string()).chain(points.iter().map(row)).collect();
    out.csv("existence.csv", &all, json!({ "failures": failures }))?;

    let fixed_inr = nearest(&inrs, sys.eta(0, 1));
    let fixed_snr = nearest(&snrs, sys.rho(0));
    let snr_slice: String = std::iter::once(header.to_string())
        .chain(points.iter().filter(|p| Some(p.inr) == fixed_inr).map(row))
        .collect();
    let inr_slice: String = std::iter::once(header.to_string())
        .chain(points.iter().filter(|p| Some(p.snr) == fixed_snr).map(row))
        .collect();
    out.csv("existence_snr_slice.csv", &snr_slice, json!({ "inr": fixed_inr }))?;
    out.csv("existence_inr_slice.csv", &inr_slice, json!({ "snr": fixed_snr }))?;
    println!(
        "existence sweep: {} points, NB exists at {}",
        points.len(),
        points.iter().filter(|p| p.exists).count()
    );
    Ok(out)
}

const CURVATURE_HEADER: &str = "t,snr,inr,f_second,alpha_sum,beta_sum,gamma_sum,all_Ti_positive\n";

fn curvature_row(t: f64, snr: f64, inr: f64, c: &crate::curvature::CurvatureTerms) -> String {
    let s = |v: &[f64]| v.iter().sum::<f64>();
    format!(
        "{},{},{},{},{},{},{},{}\n",
        num(t),
        num(snr),
        num(inr),
        num(c.f_second),
        num(s(&c.alpha)),
        num(s(&c.beta)),
        num(s(&c.gamma)),
        c.all_t_positive()
    )
}

/// With SNR and INR grids: `f''(t)` at one `t` over the grid. Without: a scan over `t` at the
/// scenario's own levels.
pub fn cmd_curvature(config: &RunConfig) -> Result<Outputs> {
    let sys = config.scenario()?;
    sys.require_two_users("curvature")
        .map_err(|_| Error::UnsupportedDimension(format!("curvature needs 2 users, scenario has {}", sys.users())))?;
    let mut out = Outputs::new(config)?;
    let mut csv = String::from(CURVATURE_HEADER);
    if config.snr_grid.is_some() || config.inr_grid.is_some() {
        let snrs = config.snr_grid.clone().unwrap_or_else(|| vec![sys.rho(0)]);
        let inrs = config.inr_grid.clone().unwrap_or_else(|| vec![sys.eta(0, 1)]);
        let t = config.tol("t", 0.5);
        let opts = LevelScanOptions {
            iwf: config.iwf(),
            nb: config.nb(&sys),
        };
        let cells = level_scan(&sys, &snrs, &inrs, t, &opts);
        let mut skipped = Vec::new();
        for c in &cells {
            match &c.terms {
                Some(terms) => csv.push_str(&curvature_row(t, c.snr, c.inr, terms)),
                None => skipped.push(json!({
                    "snr": c.snr,
                    "inr": c.inr,
                    "nb_exists": c.nb_exists,
                    "error": c.error,
                })),
            }
        }
        let negative = cells
            .iter()
            .filter_map(|c| c.terms.as_ref())
            .all(|c| c.f_second < 0.0);
        out.csv("curvature.csv", &csv, json!({ "t": t, "skipped": skipped, "all_negative": negative }))?;
        println!("curvature: {} grid points, f'' < 0 at every NB point: {negative}", cells.len());
    } else {
        let (ne, boundary, nb) = solve_nb(config, &sys)?;
        let boundary = boundary.ok_or_else(|| Error::UnsupportedDimension("curvature path needs Nt, Nr <= 2".into()))?;
        if !nb.exists {
            out.csv("curvature.csv", &csv, json!({ "nb_exists": false }))?;
            println!("curvature: no NB solution, nothing to scan");
            return Ok(out);
        }
        let path = boundary_path(&sys, &boundary, nb.rates.get(0))?;
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let scan = curvature_scan(&sys, &path, &grid, &ne.rates_at_ne);
        let mut errors = Vec::new();
        for r in &scan.records {
            if let Some(terms) = &r.terms {
                csv.push_str(&curvature_row(r.t, sys.rho(0), sys.eta(0, 1), terms));
            }
            if let Some(e) = &r.error {
                errors.push(json!({ "t": r.t, "error": e }));
            }
        }
        out.csv(
            "curvature.csv",
            &csv,
            json!({ "concave_inside_bargaining_set": scan.concave, "tolerance": CONCAVITY_TOL, "errors": errors }),
        )?;
        println!("curvature: {} path points, concave inside the bargaining set: {}", grid.len(), scan.concave);
    }
    Ok(out)
}

pub fn run(config: &RunConfig) -> Result<Outputs> {
    match config.command {
        Command::Ne => cmd_ne(config),
        Command::Nb => cmd_nb(config),
        Command::Boundary => cmd_boundary(config),
        Command::ConvexitySweep => cmd_convexity_sweep(config),
        Command::ExistenceSweep => cmd_existence_sweep(config),
        Command::Curvature => cmd_curvature(config),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotConverged(_) => EXIT_NOT_CONVERGED,
        Error::UnsupportedDimension(_) | Error::WrongDimensions { .. } => EXIT_UNSUPPORTED,
        Error::Validation { source, .. } => match source.as_ref() {
            Error::UnsupportedDimension(_) | Error::WrongDimensions { .. } => EXIT_UNSUPPORTED,
            _ => EXIT_VALIDATION,
        },
        Error::ShapeMismatch { .. }
        | Error::NonFinite { .. }
        | Error::NonPositiveParameter { .. }
        | Error::NotHermitian { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::PowerBudgetExceeded { .. }
        | Error::IndexOutOfRange { .. }
        | Error::UnsupportedStage(_)
        | Error::SingularDirectChannel { .. }
        | Error::SingularCombinedChannel { .. }
        | Error::Parse { .. } => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|c| run(&c));
    match result {
        Ok(out) => {
            for p in &out.written {
                eprintln!("wrote {}", display(p));
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_forms() {
        assert_eq!(parse_grid("0:30:10").unwrap(), vec![0.0, 10.0, 20.0, 30.0]);
        assert_eq!(parse_grid("1,2.5, 4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap().len(), 4);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("5:1:1").unwrap().is_empty());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NotConverged("x".into())), EXIT_NOT_CONVERGED);
        assert_eq!(exit_code(&Error::UnsupportedDimension("x".into())), EXIT_UNSUPPORTED);
        assert_eq!(exit_code(&Error::NonFinite { field: "x".into() }), EXIT_VALIDATION);
    }

    #[test]
    fn unknown_tolerance_key_is_rejected() {
        let cli = Cli::try_parse_from(["ratebargain", "ne", "--tol", "bogus=1"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
    }
}

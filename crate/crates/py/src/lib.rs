//! Python bindings. Matrices cross the boundary as nested lists of Python complex numbers,
//! profiles as one such matrix per user.

use std::path::Path;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ratebargain::bargaining::{
    self, classify_feasible_type, comparator_solutions, solve_nash_bargaining_on, BargainingOutcome, NbOptions,
    SolutionKind,
};
use ratebargain::cli::{exit_code, ANGLE_TOL_DEG, EXIT_VALIDATION};
use ratebargain::equilibrium::{find_nash_equilibrium, IwfOptions, IwfReport};
use ratebargain::model::{self, ComplexMatrix, CovarianceMatrix, InterferenceSystem, StrategyProfile};
use ratebargain::pareto::{certify_convexity, refined_boundary, GridResolution, ParetoBoundary, RefineOptions};
use ratebargain::{cancellation, rates, Error};

type Matrix = Vec<Vec<Complex64>>;

fn py_err(e: Error) -> PyErr {
    if exit_code(&e) == EXIT_VALIDATION {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_matrix(rows: &Matrix) -> PyResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    ComplexMatrix::new(r, c, rows.concat()).map_err(py_err)
}

fn from_matrix(m: &ComplexMatrix) -> Matrix {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

fn from_profile(p: &StrategyProfile) -> Vec<Matrix> {
    p.covariances().iter().map(|q| from_matrix(q.matrix())).collect()
}

fn kind_name(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Ne => "ne",
        SolutionKind::Nb => "nb",
        SolutionKind::Egalitarian => "egalitarian",
        SolutionKind::KalaiSmorodinsky => "kalai_smorodinsky",
        SolutionKind::Utilitarian => "utilitarian",
        SolutionKind::Proportional => "proportional",
    }
}

fn boundary_points(b: &ParetoBoundary) -> Vec<(f64, f64)> {
    b.xy()
}

/// A multi-user MIMO interference system.
#[pyclass(name = "Scenario", module = "ratebargain", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    sys: InterferenceSystem,
}

impl PyScenario {
    fn profile(&self, q: Vec<Matrix>) -> PyResult<StrategyProfile> {
        let covs = q
            .iter()
            .map(|m| to_matrix(m).and_then(|m| CovarianceMatrix::new(m).map_err(py_err)))
            .collect::<PyResult<Vec<_>>>()?;
        StrategyProfile::new(&self.sys, covs).map_err(py_err)
    }

    fn resolution(&self, fast: bool) -> GridResolution {
        GridResolution::for_system(&self.sys, fast)
    }

    fn refine(fast: bool) -> RefineOptions {
        if fast {
            RefineOptions::coarse()
        } else {
            RefineOptions::default()
        }
    }

    fn nb_options(&self, fast: bool) -> NbOptions {
        let mut opts = if fast { NbOptions::coarse() } else { NbOptions::default() };
        opts.resolution = self.resolution(fast);
        opts
    }

    fn equilibrium(&self) -> PyResult<IwfReport> {
        find_nash_equilibrium(&self.sys, None, &IwfOptions::default()).map_err(py_err)
    }

    fn boundary(&self, ne: &IwfReport, fast: bool) -> PyResult<ParetoBoundary> {
        refined_boundary(&self.sys, &self.resolution(fast), std::slice::from_ref(&ne.profile), &Self::refine(fast))
            .map_err(py_err)
    }
}

fn outcome_dict<'py>(py: Python<'py>, o: &BargainingOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("kind", kind_name(o.kind))?;
    d.set_item("exists", o.exists)?;
    d.set_item("rates", o.rates.rates().to_vec())?;
    d.set_item("objective", o.objective_value)?;
    d.set_item("profile", from_profile(&o.profile))?;
    Ok(d)
}

#[pymethods]
impl PyScenario {
    /// Two-user system from the four channel matrices `h[rx][tx]` and the SNR/INR levels.
    #[staticmethod]
    fn two_user(h11: Matrix, h12: Matrix, h21: Matrix, h22: Matrix, rho: f64, eta: f64) -> PyResult<Self> {
        let sys = InterferenceSystem::two_user(
            to_matrix(&h11)?,
            to_matrix(&h12)?,
            to_matrix(&h21)?,
            to_matrix(&h22)?,
            rho,
            eta,
        )
        .map_err(py_err)?;
        Ok(Self { sys })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            sys: model::load_scenario(path).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            sys: model::scenario_from_json(text, Path::new(".")).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        model::scenario_to_json(&self.sys)
    }

    fn with_levels(&self, snr: f64, inr: f64) -> PyResult<Self> {
        Ok(Self {
            sys: self.sys.with_levels(snr, inr).map_err(py_err)?,
        })
    }

    #[getter]
    fn users(&self) -> usize {
        self.sys.users()
    }

    #[getter]
    fn nt(&self) -> usize {
        self.sys.nt()
    }

    #[getter]
    fn nr(&self) -> usize {
        self.sys.nr()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.sys.rhos().to_vec()
    }

    #[getter]
    fn eta(&self) -> Vec<Vec<f64>> {
        self.sys.etas().to_vec()
    }

    fn channel(&self, rx: usize, tx: usize) -> PyResult<Matrix> {
        if rx >= self.sys.users() || tx >= self.sys.users() {
            return Err(PyValueError::new_err("user index out of range"));
        }
        Ok(from_matrix(self.sys.h(rx, tx)))
    }

    /// Uniform-power profile.
    fn uniform_profile(&self) -> Vec<Matrix> {
        from_profile(&StrategyProfile::uniform(&self.sys))
    }

    /// Achievable rates in bits per channel use.
    fn rates(&self, profile: Vec<Matrix>) -> PyResult<Vec<f64>> {
        let p = self.profile(profile)?;
        Ok(rates::rate_vector(&self.sys, &p).map_err(py_err)?.rates().to_vec())
    }

    /// Nash equilibrium by iterative water-filling.
    fn nash_equilibrium<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let ne = py.detach(|| self.equilibrium())?;
        let d = PyDict::new(py);
        d.set_item("profile", from_profile(&ne.profile))?;
        d.set_item("rates", ne.rates_at_ne.rates().to_vec())?;
        d.set_item("converged", ne.converged)?;
        d.set_item("iterations", ne.iterations)?;
        Ok(d)
    }

    #[pyo3(signature = (fast = false))]
    fn nash_bargaining<'py>(&self, py: Python<'py>, fast: bool) -> PyResult<Bound<'py, PyDict>> {
        let (ne, nb) = py.detach(|| -> PyResult<_> {
            let ne = self.equilibrium()?;
            let opts = self.nb_options(fast);
            let boundary = self.boundary(&ne, fast)?;
            let nb = solve_nash_bargaining_on(&self.sys, &ne, Some(&boundary), &opts).map_err(py_err)?;
            Ok((ne, nb))
        })?;
        let d = outcome_dict(py, &nb)?;
        d.set_item("ne_rates", ne.rates_at_ne.rates().to_vec())?;
        if nb.exists {
            let types = classify_feasible_type(&ne.profile, &nb.profile, ANGLE_TOL_DEG).map_err(py_err)?;
            d.set_item("feasible_types", types.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>())?;
        }
        Ok(d)
    }

    /// Refined Pareto boundary as `(I1, I2)` pairs plus its convexity certificate.
    #[pyo3(signature = (fast = false, eps = 1e-3))]
    fn pareto_boundary<'py>(&self, py: Python<'py>, fast: bool, eps: f64) -> PyResult<Bound<'py, PyDict>> {
        let boundary = py.detach(|| self.equilibrium().and_then(|ne| self.boundary(&ne, fast)))?;
        let cert = certify_convexity(&boundary, eps).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("points", boundary_points(&boundary))?;
        d.set_item("convex", cert.convex)?;
        d.set_item("worst_violation", cert.worst_violation)?;
        Ok(d)
    }

    /// NE followed by the egalitarian, Kalai-Smorodinsky, utilitarian and proportional points.
    #[pyo3(signature = (fast = false))]
    fn comparators<'py>(&self, py: Python<'py>, fast: bool) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let out = py.detach(|| -> PyResult<_> {
            let ne = self.equilibrium()?;
            let boundary = self.boundary(&ne, fast)?;
            comparator_solutions(&self.sys, &boundary, &ne).map_err(py_err)
        })?;
        out.iter().map(|o| outcome_dict(py, o)).collect()
    }

    /// Rate boundary with `stage`-level interference cancellation at the receivers.
    #[pyo3(signature = (stage, fast = false))]
    fn ic_boundary(&self, py: Python<'_>, stage: usize, fast: bool) -> PyResult<Vec<(f64, f64)>> {
        let b = py.detach(|| {
            cancellation::ic_rate_boundary(&self.sys, stage, &self.resolution(fast), &Self::refine(fast)).map_err(py_err)
        })?;
        Ok(boundary_points(&b))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(users={}, nt={}, nr={}, rho={:?})",
            self.sys.users(),
            self.sys.nt(),
            self.sys.nr(),
            self.sys.rhos()
        )
    }
}

#[pyfunction]
fn load_scenario(path: &str) -> PyResult<PyScenario> {
    PyScenario::load(path)
}

#[pyfunction]
fn jain_fairness_index(measured: Vec<f64>, optimal: Vec<f64>) -> PyResult<f64> {
    bargaining::jain_fairness_index(&measured, &optimal).map_err(py_err)
}

#[pymodule(name = "ratebargain")]
fn ratebargain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(load_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(jain_fairness_index, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

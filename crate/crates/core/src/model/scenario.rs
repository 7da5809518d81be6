use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_system, ComplexMatrix, InterferenceSystem, MatrixJson};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "Nt")]
    nt: usize,
    #[serde(rename = "Nr")]
    nr: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_db: Option<Vec<Vec<f64>>>,
    p: Vec<f64>,
    #[serde(rename = "H")]
    h: Vec<Vec<MatrixJson>>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn pick<T>(
    path: &Path,
    name: &str,
    linear: Option<T>,
    db: Option<T>,
    convert: impl FnOnce(T) -> T,
) -> Result<T> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("both `{name}` and `{name}_db` given"),
        }),
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(convert(v)),
        (None, None) => Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("missing `{name}` (or `{name}_db`)"),
        }),
    }
}

fn build(path: &Path, f: ScenarioFile) -> Result<InterferenceSystem> {
    let rho = pick(path, "rho", f.rho, f.rho_db, |v| {
        v.into_iter().map(db_to_linear).collect()
    })?;
    let eta = pick(path, "eta", f.eta, f.eta_db, |v| {
        v.into_iter()
            .map(|row| row.into_iter().map(db_to_linear).collect())
            .collect()
    })?;
    let invalid = |source: Error| Error::Validation {
        path: path.to_path_buf(),
        source: Box::new(source),
    };
    if rho.len() != f.m {
        return Err(invalid(Error::ShapeMismatch {
            field: "rho".into(),
            expected: format!("M = {} entries", f.m),
            found: format!("{}", rho.len()),
        }));
    }
    let h = f
        .h
        .iter()
        .map(|row| row.iter().map(ComplexMatrix::try_from).collect())
        .collect::<Result<Vec<Vec<_>>>>()
        .map_err(invalid)?;
    let sys = InterferenceSystem {
        nt: f.nt,
        nr: f.nr,
        h,
        rho,
        eta,
        p: f.p,
    };
    validate_system(&sys).map_err(invalid)?;
    Ok(sys)
}

/// Parses a scenario from JSON text; `origin` is used in error messages.
pub fn scenario_from_json(text: &str, origin: &Path) -> Result<InterferenceSystem> {
    let f: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    build(origin, f)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<InterferenceSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    scenario_from_json(&text, path)
}

/// Serializes with linear `rho` and `eta`.
pub fn scenario_to_json(sys: &InterferenceSystem) -> String {
    let f = ScenarioFile {
        m: sys.users(),
        nt: sys.nt,
        nr: sys.nr,
        rho: Some(sys.rho.clone()),
        rho_db: None,
        eta: Some(sys.eta.clone()),
        eta_db: None,
        p: sys.p.clone(),
        h: sys
            .h
            .iter()
            .map(|row| row.iter().map(MatrixJson::from).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("scenario serializes")
}

pub fn save_scenario(sys: &InterferenceSystem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_json(sys) + "\n")?;
    Ok(())
}

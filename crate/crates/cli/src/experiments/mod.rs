//! Experiment registry. Each experiment owns a typed parameter and tolerance
//! schema and turns them into an [`ExperimentReport`].

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use flatdet::report::ExperimentReport;

use crate::config::ExperimentId;
use crate::error::CliError;

pub mod circle_torsion;
pub mod finite_bv;
pub mod heat_parametrix;
pub mod hodge_anomaly;
pub mod ruelle_cat;
pub mod subshift_zeta;

pub trait Experiment {
    const ID: ExperimentId;
    type Params: Serialize + DeserializeOwned + Default;
    type Tolerances: Serialize + DeserializeOwned + Default;

    fn validate(_params: &Self::Params) -> Result<(), String> {
        Ok(())
    }

    fn run(params: &Self::Params, tol: &Self::Tolerances, seed: u64) -> ExperimentReport;
}

/// A configuration checked against its experiment's schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentId,
    pub seed: u64,
    /// `{experiment, seed, parameters, tolerances}` with every default filled.
    pub echo: Value,
}

fn typed<T: DeserializeOwned>(section: &str, map: &Map<String, Value>) -> Result<T, CliError> {
    serde_path_to_error::deserialize(Value::Object(map.clone()))
        .map_err(|e| CliError::Usage(format!("{} at `{section}.{}`", e.inner(), e.path())))
}

fn resolve_with<E: Experiment>(seed: u64, params: &Map<String, Value>, tol: &Map<String, Value>) -> Result<Resolved, CliError> {
    let p: E::Params = typed("parameters", params)?;
    E::validate(&p).map_err(CliError::Usage)?;
    let t: E::Tolerances = typed("tolerances", tol)?;
    let echo = json!({
        "experiment": E::ID.name(),
        "seed": seed,
        "parameters": serde_json::to_value(&p).map_err(|e| CliError::Usage(e.to_string()))?,
        "tolerances": serde_json::to_value(&t).map_err(|e| CliError::Usage(e.to_string()))?,
    });
    Ok(Resolved { experiment: E::ID, seed, echo })
}

fn run_with<E: Experiment>(resolved: &Resolved) -> ExperimentReport {
    // the echo was produced from these types, so it reads back
    let p: E::Params = serde_json::from_value(resolved.echo["parameters"].clone()).unwrap_or_default();
    let t: E::Tolerances = serde_json::from_value(resolved.echo["tolerances"].clone()).unwrap_or_default();
    let mut report = E::run(&p, &t, resolved.seed);
    report.experiment = E::ID.name().to_string();
    report.config = resolved.echo.clone();
    report
}

macro_rules! dispatch {
    ($id:expr, $f:ident, $($arg:expr),*) => {
        match $id {
            ExperimentId::FiniteBv => $f::<finite_bv::FiniteBv>($($arg),*),
            ExperimentId::HodgeAnomaly => $f::<hodge_anomaly::HodgeAnomaly>($($arg),*),
            ExperimentId::CircleTorsion => $f::<circle_torsion::CircleTorsion>($($arg),*),
            ExperimentId::HeatParametrix => $f::<heat_parametrix::HeatParametrix>($($arg),*),
            ExperimentId::RuelleCat => $f::<ruelle_cat::RuelleCat>($($arg),*),
            ExperimentId::SubshiftZeta => $f::<subshift_zeta::SubshiftZeta>($($arg),*),
        }
    };
}

pub fn resolve(id: ExperimentId, seed: u64, params: &Map<String, Value>, tol: &Map<String, Value>) -> Result<Resolved, CliError> {
    dispatch!(id, resolve_with, seed, params, tol)
}

pub fn run(resolved: &Resolved) -> ExperimentReport {
    dispatch!(resolved.experiment, run_with, resolved)
}

/// Records a failed case instead of aborting the experiment.
pub(crate) fn record<T>(report: &mut ExperimentReport, case: &str, r: flatdet::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            report.failures.push(format!("{case}: {e}"));
            None
        }
    }
}

/// Verdict over all rows whose case starts with `prefix`.
pub(crate) fn rows_verdict(report: &mut ExperimentReport, name: &str, prefix: &str, detail: &str) {
    let rows: Vec<_> = report.rows.iter().filter(|r| r.case.starts_with(prefix)).collect();
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    let failed = rows.iter().filter(|r| !r.pass).count();
    let detail = format!("{detail}; {} rows, {failed} failed", rows.len());
    report.verdict(name, pass, detail);
}

/// Largest `abs_error` over rows whose case starts with `prefix`.
pub(crate) fn max_abs_error(report: &ExperimentReport, prefix: &str) -> f64 {
    report
        .rows
        .iter()
        .filter(|r| r.case.starts_with(prefix))
        .filter_map(|r| r.abs_error)
        .fold(0.0, f64::max)
}

/// Seed of case `i` of kind `kind`, decorrelated from the run seed.
pub(crate) fn case_seed(seed: u64, kind: u64, i: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (kind << 48) ^ i
}

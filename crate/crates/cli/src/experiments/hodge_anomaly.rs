//! Metric variations of random acyclic complexes: the log-det ledger for raw
//! families and exact constancy once the supervolume is normalized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::graded::random::random_acyclic_complex;
use flatdet::hodge::{random_metric_family, supervolume_normalize, torsion_anomaly_experiment};
use flatdet::report::{ExperimentReport, Provenance, ReportRow};

use super::{case_seed, max_abs_error, rows_verdict, Experiment};
use crate::config::{ExperimentId, Grid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub families: u64,
    pub tau_grid: Grid,
    pub scale: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            families: 20,
            tau_grid: Grid((-5..=5).map(|i| 0.1 * i as f64).collect()),
            scale: 0.6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ledger: f64,
    pub normalized: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ledger: 1e-8, normalized: 1e-9 }
    }
}

pub struct HodgeAnomaly;

fn family_case(p: &Params, tol: &Tolerances, seed: u64, f: u64) -> (Vec<ReportRow>, Vec<String>) {
    let s = seed.wrapping_add(f);
    let d = random_acyclic_complex(s);
    let fam = random_metric_family(case_seed(seed, 4, f), d.dims(), p.scale);
    let inputs = json!({ "complex_seed": s, "dims": d.dims(), "scale": p.scale });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    match torsion_anomaly_experiment(&d, &fam, &p.tau_grid.0) {
        Ok(rep) => {
            failures.extend(rep.failures.iter().map(|e| format!("ledger/family={f}/{e}")));
            let mut row = ReportRow::deviation(
                format!("ledger/family={f}"),
                inputs.clone(),
                rep.metrics["max_ledger_defect"],
                Provenance::InternalCrosscheck,
                tol.ledger,
            );
            row.value = json!({
                "ledger_defect": rep.metrics["max_ledger_defect"],
                "supervolume_drift": rep.metrics["max_supervolume_drift"],
            });
            rows.push(row);
        }
        Err(e) => failures.push(format!("ledger/family={f}: {e}")),
    }
    match torsion_anomaly_experiment(&d, &supervolume_normalize(&fam), &p.tau_grid.0) {
        Ok(rep) => {
            failures.extend(rep.failures.iter().map(|e| format!("normalized/family={f}/{e}")));
            rows.push(ReportRow::deviation(
                format!("normalized/family={f}"),
                inputs,
                rep.metrics["max_relative_drift"],
                Provenance::InternalCrosscheck,
                tol.normalized,
            ));
        }
        Err(e) => failures.push(format!("normalized/family={f}: {e}")),
    }
    (rows, failures)
}

impl Experiment for HodgeAnomaly {
    const ID: ExperimentId = ExperimentId::HodgeAnomaly;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        if p.tau_grid.0.is_empty() {
            return Err("parameters.tau_grid is empty".into());
        }
        if !(p.scale > 0.0) {
            return Err("parameters.scale must be positive".into());
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let cases: Vec<_> = (0..p.families).into_par_iter().map(|f| family_case(p, tol, seed, f)).collect();
        for (rows, failures) in cases {
            report.rows.extend(rows);
            report.failures.extend(failures);
        }
        report.metric("max_ledger_defect", max_abs_error(&report, "ledger/"));
        report.metric("max_normalized_drift", max_abs_error(&report, "normalized/"));
        rows_verdict(&mut report, "anomaly_ledger", "ledger/", "log sdet + Σ(-1)^k log det G_k constant");
        rows_verdict(&mut report, "exact_constancy", "normalized/", "supervolume-normalized families");
        report
    }
}

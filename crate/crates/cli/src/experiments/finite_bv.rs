//! Constancy of the restricted superdeterminant on random acyclic complexes,
//! the restricted-trace identity and the Duhamel derivative.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::graded::random::{
    make_supertraceless, random_endomorphism, random_matrix, random_regular_pair, rng_from_seed,
};
use flatdet::graded::variation::constancy_report;
use flatdet::graded::{
    duhamel_derivative, graded_commutator, heat_semigroup_central_difference, split_complement, supertrace_pair,
    ConjugatorPath, GradedMap, InnerVariation, OperatorFamily,
};
use flatdet::linalg::real;
use flatdet::report::{ExperimentReport, Provenance, ReportRow};

use super::{case_seed, max_abs_error, rows_verdict, Experiment};
use crate::config::{ExperimentId, Grid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub seeds: u64,
    pub tau_grid: Grid,
    pub theta_scale: f64,
    pub general_variations: bool,
    pub trace_cases: u64,
    pub duhamel_cases: u64,
    pub duhamel_order: usize,
    pub difference_step: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            seeds: 100,
            tau_grid: Grid(vec![-0.6, -0.3, 0.3, 0.6, 1.0]),
            theta_scale: 0.5,
            general_variations: true,
            trace_cases: 20,
            duhamel_cases: 20,
            duhamel_order: 32,
            difference_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub constancy: f64,
    pub anomaly: f64,
    pub trace_identity: f64,
    pub duhamel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { constancy: 1e-9, anomaly: 1e-8, trace_identity: 1e-10, duhamel: 1e-6 }
    }
}

pub struct FiniteBv;

type Case = (Vec<ReportRow>, Vec<String>);

fn constancy_case(p: &Params, tol: &Tolerances, seed: u64, s: u64) -> Case {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let pair = match random_regular_pair(s) {
        Ok(x) => x,
        Err(e) => return (rows, vec![format!("constancy/seed={s}: {e}")]),
    };
    let dims = pair.d.dims().to_vec();
    let mut rng = rng_from_seed(case_seed(seed, 1, s));
    let theta = make_supertraceless(&random_endomorphism(&mut rng, &dims, p.theta_scale));
    let var = InnerVariation::Conjugator(ConjugatorPath::Exponential(theta));
    let inputs = json!({ "seed": s, "dims": dims });
    match constancy_report(&pair.delta, &pair.d, &var, &p.tau_grid.0) {
        Ok(rep) => {
            failures.extend(rep.failures.iter().map(|f| format!("constancy/seed={s}/{f}")));
            let drift = rep.metrics["max_relative_drift"];
            rows.push(ReportRow::deviation(
                format!("constancy/seed={s}"),
                inputs.clone(),
                drift,
                Provenance::InternalCrosscheck,
                tol.constancy,
            ));
        }
        Err(e) => failures.push(format!("constancy/seed={s}: {e}")),
    }
    if p.general_variations {
        let theta = random_endomorphism(&mut rng, &dims, p.theta_scale);
        let var = InnerVariation::Conjugator(ConjugatorPath::Exponential(theta));
        match constancy_report(&pair.delta, &pair.d, &var, &p.tau_grid.0) {
            Ok(rep) => {
                failures.extend(rep.failures.iter().map(|f| format!("anomaly/seed={s}/{f}")));
                rows.push(ReportRow::deviation(
                    format!("anomaly/seed={s}"),
                    inputs,
                    rep.metrics["max_anomaly_defect"],
                    Provenance::InternalCrosscheck,
                    tol.anomaly,
                ));
            }
            Err(e) => failures.push(format!("anomaly/seed={s}: {e}")),
        }
    }
    (rows, failures)
}

fn trace_case(tol: &Tolerances, seed: u64, i: u64) -> Case {
    let s = case_seed(seed, 2, i);
    let run = || -> flatdet::Result<ReportRow> {
        let pair = random_regular_pair(s)?;
        let big_d = graded_commutator(&pair.delta, &pair.d)?;
        let split = split_complement(&pair.delta)?;
        let t = rng_from_seed(s).random_range(0.05..2.0);
        let (restricted, full) = supertrace_pair(&big_d, &split, t)?;
        Ok(ReportRow::complex(
            format!("trace/case={i}"),
            json!({ "seed": s, "t": t, "dims": pair.d.dims() }),
            restricted,
            full,
            Provenance::InternalCrosscheck,
            tol.trace_identity,
        ))
    };
    match run() {
        Ok(row) => (vec![row], vec![]),
        Err(e) => (vec![], vec![format!("trace/case={i}: {e}")]),
    }
}

fn duhamel_case(p: &Params, tol: &Tolerances, seed: u64, i: u64) -> Case {
    let s = case_seed(seed, 3, i);
    let run = || -> flatdet::Result<ReportRow> {
        let pair = random_regular_pair(s)?;
        let d0 = graded_commutator(&pair.delta, &pair.d)?;
        let mut rng = rng_from_seed(s);
        let pert = GradedMap::from_fn(d0.dims(), 0, |_, m, _| random_matrix(&mut rng, m, m));
        let tau = rng.random_range(-0.5..0.5);
        let t = rng.random_range(0.1..1.0);
        let fam = OperatorFamily::new(|x| d0.add(&pert.scale(real(x)))).with_derivative(|_| Ok(pert.clone()));
        let q = duhamel_derivative(&fam, tau, t, p.duhamel_order)?;
        let fd = heat_semigroup_central_difference(&fam, tau, t, p.difference_step)?;
        Ok(ReportRow::deviation(
            format!("duhamel/case={i}"),
            json!({ "seed": s, "tau": tau, "t": t, "dims": d0.dims() }),
            q.sub(&fd)?.norm(),
            Provenance::InternalCrosscheck,
            tol.duhamel,
        ))
    };
    match run() {
        Ok(row) => (vec![row], vec![]),
        Err(e) => (vec![], vec![format!("duhamel/case={i}: {e}")]),
    }
}

impl Experiment for FiniteBv {
    const ID: ExperimentId = ExperimentId::FiniteBv;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        if p.tau_grid.0.is_empty() {
            return Err("parameters.tau_grid is empty".into());
        }
        if p.duhamel_order == 0 || !(p.difference_step > 0.0) {
            return Err("parameters.duhamel_order and parameters.difference_step must be positive".into());
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let mut cases: Vec<Case> = (0..p.seeds)
            .into_par_iter()
            .map(|i| constancy_case(p, tol, seed, seed.wrapping_add(i)))
            .collect();
        cases.extend((0..p.trace_cases).into_par_iter().map(|i| trace_case(tol, seed, i)).collect::<Vec<_>>());
        cases.extend((0..p.duhamel_cases).into_par_iter().map(|i| duhamel_case(p, tol, seed, i)).collect::<Vec<_>>());
        for (rows, failures) in cases {
            report.rows.extend(rows);
            report.failures.extend(failures);
        }
        report.metric("max_relative_drift", max_abs_error(&report, "constancy/"));
        report.metric("max_anomaly_defect", max_abs_error(&report, "anomaly/"));
        report.metric("max_duhamel_defect", max_abs_error(&report, "duhamel/"));
        rows_verdict(&mut report, "exact_constancy", "constancy/", "supertraceless conjugations leave sdet fixed");
        if p.general_variations {
            rows_verdict(&mut report, "anomaly_ledger", "anomaly/", "general conjugations follow ∫ str θ");
        }
        if p.trace_cases > 0 {
            rows_verdict(&mut report, "restricted_trace_identity", "trace/", "restricted and degree-weighted supertraces");
        }
        if p.duhamel_cases > 0 {
            rows_verdict(&mut report, "duhamel", "duhamel/", "quadrature against central difference");
        }
        report
    }
}

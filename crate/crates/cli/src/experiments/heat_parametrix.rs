//! Heat-kernel parametrix on the circle of circumference 2π: remainder decay,
//! accuracy against the spectral kernel, heat coefficients and the first
//! Volterra correction.

use std::f64::consts::PI;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::linalg::{real, C64};
use flatdet::parametrix::{
    circle_grid, heat_coefficients, log_spaced, parametrix_accuracy, remainder_scaling, volterra_correct,
    ApproximateHeatKernel, Potential, SpectralHeatOracle, VolterraSettings,
};
use flatdet::report::{complex_json, ExperimentReport, Provenance, ReportRow};

use super::{record, rows_verdict, Experiment};
use crate::config::{ExperimentId, Grid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub potential: String,
    pub depth: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub grid: usize,
    pub accuracy_samples: usize,
    pub accuracy_grid: usize,
    pub coefficient_depth: usize,
    pub volterra_times: Grid,
    pub volterra_point: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            potential: "sin".into(),
            depth: 4,
            t_min: 1e-3,
            t_max: 1e-1,
            samples: 9,
            grid: 64,
            accuracy_samples: 5,
            accuracy_grid: 32,
            coefficient_depth: 7,
            volterra_times: Grid(vec![0.1, 0.05, 0.025]),
            volterra_point: 0.7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance on the fitted remainder exponent.
    pub exponent: f64,
    /// Allowed shortfall of the fitted accuracy exponent below the bound.
    pub accuracy_exponent: f64,
    pub coefficients: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exponent: 0.2, accuracy_exponent: 0.2, coefficients: 1e-12 }
    }
}

pub struct HeatParametrix;

/// Mean of `f` over the circle by the periodic trapezoid rule.
fn circle_mean(f: impl Fn(f64) -> f64) -> f64 {
    let n = 512;
    (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).sum::<f64>() / n as f64
}

fn coefficient_rows(report: &mut ExperimentReport, v: &Potential, depth: usize, tol: &Tolerances) {
    let Some(b) = record(report, "coefficients", heat_coefficients(v, depth, None)) else { return };
    let sqrt_pi = PI.sqrt();
    // local invariants 1, -v, v²/2 integrated over the circle
    let low = [
        sqrt_pi,
        -sqrt_pi * circle_mean(|x| v.eval(x)),
        0.5 * sqrt_pi * circle_mean(|x| v.eval(x).powi(2)),
    ];
    for c in &b {
        let inputs = json!({ "potential": v.label(), "k": c.k });
        if c.k % 2 == 1 {
            let exact_zero = c.over_sqrt_pi.is_zero();
            report.rows.push(ReportRow {
                case: format!("odd-coefficient/k={}", c.k),
                inputs,
                value: complex_json(c.value),
                reference: Some(json!(0.0)),
                provenance: Provenance::DerivedOracle,
                abs_error: Some(c.value.norm()),
                rel_error: None,
                pass: exact_zero,
            });
        } else if c.k / 2 < low.len() {
            report.rows.push(ReportRow::complex(
                format!("even-coefficient/k={}", c.k),
                inputs,
                c.value,
                real(low[c.k / 2]),
                Provenance::DerivedOracle,
                tol.coefficients,
            ));
        }
    }
    if let Some(b0) = record(report, "free-coefficient", heat_coefficients(&Potential::zero(), 0, None)) {
        report.rows.push(ReportRow::complex(
            "free-coefficient/k=0",
            json!({ "potential": "0", "k": 0 }),
            b0[0].value,
            real(sqrt_pi),
            Provenance::DerivedOracle,
            tol.coefficients,
        ));
    }
}

impl Experiment for HeatParametrix {
    const ID: ExperimentId = ExperimentId::HeatParametrix;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        Potential::parse(&p.potential).map_err(|e| format!("parameters.potential: {e}"))?;
        if !(p.t_min > 0.0 && p.t_max > p.t_min) {
            return Err("parameters.t_min and parameters.t_max need 0 < t_min < t_max".into());
        }
        if p.samples < 2 || p.accuracy_samples < 2 || p.grid == 0 || p.accuracy_grid == 0 {
            return Err("parameters.samples, accuracy_samples need at least 2 and grids must be nonempty".into());
        }
        if p.depth < 2 {
            return Err("parameters.depth must be at least 2".into());
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, _seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let Some(v) = record(&mut report, "potential", Potential::parse(&p.potential)) else { return report };
        let Some(kernel) = record(&mut report, "kernel", ApproximateHeatKernel::new(&v, p.depth)) else {
            return report;
        };
        let want = (p.depth as f64 - 1.0) / 2.0;
        let inputs = json!({ "potential": v.label(), "depth": p.depth, "t_min": p.t_min, "t_max": p.t_max });

        let ts = log_spaced(p.t_min, p.t_max, p.samples);
        if let Some(fit) = record(&mut report, "remainder", remainder_scaling(&kernel, &ts, &circle_grid(p.grid))) {
            let mut row = ReportRow::real("remainder-exponent", inputs.clone(), fit.exponent, want, Provenance::DerivedOracle, 0.0);
            row.pass = (fit.exponent - want).abs() <= tol.exponent * want;
            report.metric("remainder_exponent", fit.exponent);
            report.rows.push(row);
        }

        let ts = log_spaced(p.t_min, p.t_max, p.accuracy_samples);
        if let Some(acc) = record(&mut report, "accuracy", parametrix_accuracy(&kernel, &ts, &circle_grid(p.accuracy_grid))) {
            let ok = acc.bound_constant.is_finite() && acc.fit.exponent >= want * (1.0 - tol.accuracy_exponent);
            report.rows.push(ReportRow {
                case: "accuracy".into(),
                inputs: inputs.clone(),
                value: json!({
                    "bound_constant": acc.bound_constant,
                    "fitted_exponent": acc.fit.exponent,
                    "oracle_error": acc.oracle_error,
                }),
                reference: Some(json!(want)),
                provenance: Provenance::DerivedOracle,
                abs_error: Some((acc.fit.exponent - want).abs()),
                rel_error: None,
                pass: ok,
            });
            report.metric("accuracy_constant", acc.bound_constant);
        }

        coefficient_rows(&mut report, &v, p.coefficient_depth, tol);

        let x = p.volterra_point;
        let settings = VolterraSettings::default();
        let corrected: Vec<_> = p
            .volterra_times
            .0
            .par_iter()
            .map(|&t| -> flatdet::Result<(C64, C64, C64)> {
                let r = volterra_correct(&kernel, 1, t, x, x, &settings)?;
                let oracle = SpectralHeatOracle::new(&v, t, SpectralHeatOracle::default_modes(t))?.eval(x, x);
                Ok((r.base, r.value, oracle))
            })
            .collect();
        for (&t, r) in p.volterra_times.0.iter().zip(corrected) {
            let case = format!("volterra/t={t}");
            let Some((base, value, oracle)) = record(&mut report, &case, r) else { continue };
            let (before, after) = ((base - oracle).norm(), (value - oracle).norm());
            report.rows.push(ReportRow {
                case,
                inputs: json!({ "t": t, "x": x }),
                value: json!({ "parametrix": complex_json(base), "corrected": complex_json(value) }),
                reference: Some(complex_json(oracle)),
                provenance: Provenance::DerivedOracle,
                abs_error: Some(after),
                rel_error: Some(after / before.max(f64::MIN_POSITIVE)),
                pass: after < before,
            });
        }

        rows_verdict(&mut report, "remainder_exponent", "remainder-exponent", "sup-norm remainder fit");
        rows_verdict(&mut report, "accuracy_bound", "accuracy", "|K_N - oracle| ≤ C t^p with fitted C");
        rows_verdict(&mut report, "odd_coefficients_vanish", "odd-coefficient/", "exact rational arithmetic");
        rows_verdict(&mut report, "low_coefficients", "even-coefficient/", "B_0, B_2, B_4 against local invariants");
        rows_verdict(&mut report, "free_b0", "free-coefficient/", "B_0 = √π for v = 0");
        if !p.volterra_times.0.is_empty() {
            rows_verdict(&mut report, "volterra_improves", "volterra/", "first correction moves toward the oracle");
        }
        report
    }
}

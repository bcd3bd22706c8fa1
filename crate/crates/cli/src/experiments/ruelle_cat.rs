//! Ruelle zeta of the suspension of a hyperbolic cat map: orbit collapse,
//! Euler product against log-sum and closed form, the flat superdeterminant
//! identity and the value at zero.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::linalg::{c, real, C64};
use flatdet::report::{complex_json, ExperimentReport, Provenance, ReportRow};
use flatdet::ruelle::{
    cat_map_catalog, orbit_log_sdet, ruelle_zeta_truncated, sdet_zeta_ratio, zeta_closed_form_cat, CatMap, OrbitCatalog,
};
use flatdet::Error;

use super::{record, rows_verdict, Experiment};
use crate::config::{Angle, ExperimentId, Grid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Row-major entries `a, b, c, d`.
    pub matrix: Vec<i64>,
    pub alpha: Angle,
    pub lambda_grid: Grid,
    pub n_max: usize,
    pub collapse_n: usize,
    #[serde(deserialize_with = "crate::config::angle_list")]
    pub zero_alphas: Vec<Angle>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            matrix: vec![2, 1, 1, 1],
            alpha: Angle(PI),
            lambda_grid: Grid((0..=15).map(|i| 1.5 + 0.1 * i as f64).collect()),
            n_max: 60,
            collapse_n: 30,
            zero_alphas: vec![Angle(PI), Angle(2.0 * PI / 3.0), Angle(PI / 2.0)],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub closed_form: f64,
    pub product_sum: f64,
    pub sdet_zeta: f64,
    pub zeta_at_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { closed_form: 1e-8, product_sum: 1e-8, sdet_zeta: 1e-8, zeta_at_zero: 1e-12 }
    }
}

pub struct RuelleCat;

pub(crate) fn cat_map(entries: &[i64]) -> Result<CatMap, String> {
    let [a, b, c, d] = entries else {
        return Err(format!("parameters.matrix needs 4 entries, got {}", entries.len()));
    };
    CatMap::new([[*a, *b], [*c, *d]]).map_err(|e| format!("parameters.matrix: {e}"))
}

/// `exp(-Σ N_n w^n / n)` summed in closed form from `N_n = t_n - 2` after
/// absorbing the trace sign into `w`.
fn zeta_from_traces(trace: i64, alpha: f64, lambda: f64) -> C64 {
    let w = C64::from_polar((-lambda).exp(), alpha) * (trace.signum() as f64);
    (1.0 - w * trace as f64 + w * w) / ((1.0 - w) * (1.0 - w))
}

fn collapse_row(catalog: &OrbitCatalog, n: usize) -> ReportRow {
    let mut checked = 0u64;
    let mut mismatched = 0u64;
    for o in catalog.orbits.iter().filter(|o| o.length <= n) {
        checked += 1;
        match &o.poincare {
            Some(p) if p.alternating_wedge_sum() == -p.abs_det() => {}
            _ => mismatched += 1,
        }
    }
    let mut row = ReportRow::deviation(
        "collapse",
        json!({ "n_max": n, "orbit_classes": checked }),
        mismatched as f64,
        Provenance::DerivedOracle,
        0.0,
    );
    row.value = json!({ "mismatched_orbits": mismatched, "checked_orbits": checked });
    row.pass = mismatched == 0 && checked > 0;
    row
}

fn lambda_row(catalog: &OrbitCatalog, a: &CatMap, alpha: f64, lambda: f64, tol: &Tolerances) -> flatdet::Result<(ReportRow, f64, f64)> {
    let l = real(lambda);
    let z = ruelle_zeta_truncated(catalog, l)?;
    let closed = zeta_closed_form_cat(a, alpha, l)?;
    let log_sdet = orbit_log_sdet(catalog, l)?;
    let ratio = sdet_zeta_ratio(catalog, l)?;
    let product_sum = (z.log_product - z.log_sum).norm();
    let sdet_defect = (ratio - 1.0).norm();
    let mut row = ReportRow::complex(
        format!("lambda={lambda}"),
        json!({ "lambda": lambda, "alpha": alpha }),
        z.value,
        closed,
        Provenance::DerivedOracle,
        tol.closed_form + z.tail_bound,
    );
    row.value = json!({
        "zeta": complex_json(z.value),
        "log_sdet": complex_json(log_sdet.value),
        "tail_bound": z.tail_bound,
        "product_sum_defect": product_sum,
        "sdet_zeta_defect": sdet_defect,
    });
    row.pass = row.pass && product_sum <= tol.product_sum + z.tail_bound && sdet_defect <= tol.sdet_zeta + z.tail_bound;
    Ok((row, product_sum, sdet_defect))
}

impl Experiment for RuelleCat {
    const ID: ExperimentId = ExperimentId::RuelleCat;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        let a = cat_map(&p.matrix)?;
        a.traces(p.n_max.max(p.collapse_n)).map_err(|e| format!("parameters.n_max: {e}"))?;
        if p.lambda_grid.0.is_empty() {
            return Err("parameters.lambda_grid is empty".into());
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, _seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let Some(a) = record(&mut report, "matrix", cat_map(&p.matrix).map_err(Error::Domain)) else { return report };
        let alpha = p.alpha.0;
        let n = p.n_max.max(p.collapse_n);
        let Some(catalog) = record(&mut report, "catalog", cat_map_catalog(&a, n, alpha)) else { return report };
        report.metric("abscissa", catalog.abscissa());

        report.rows.push(collapse_row(&catalog, p.collapse_n));

        let truncated = catalog.truncate_to_length(p.n_max);
        let results: Vec<_> =
            p.lambda_grid.0.par_iter().map(|&l| lambda_row(&truncated, &a, alpha, l, tol)).collect();
        let mut max_ps = 0.0f64;
        let mut max_sdet = 0.0f64;
        for (&l, r) in p.lambda_grid.0.iter().zip(results) {
            if let Some((row, ps, sd)) = record(&mut report, &format!("lambda={l}"), r) {
                max_ps = max_ps.max(ps);
                max_sdet = max_sdet.max(sd);
                report.rows.push(row);
            }
        }
        report.metric("max_product_sum_defect", max_ps);
        report.metric("max_sdet_zeta_defect", max_sdet);

        for za in &p.zero_alphas {
            let case = format!("zeta-at-zero/alpha={}", za.0);
            let oracle = zeta_from_traces(a.trace(), za.0, 0.0);
            match zeta_closed_form_cat(&a, za.0, c(0.0, 0.0)) {
                Ok(v) => report.rows.push(ReportRow::complex(
                    case,
                    json!({ "alpha": za.0, "lambda": 0.0 }),
                    v,
                    oracle,
                    Provenance::DerivedOracle,
                    tol.zeta_at_zero,
                )),
                Err(e) => report.failures.push(format!("{case}: {e}")),
            }
        }

        rows_verdict(&mut report, "orbit_collapse", "collapse", "Σ(-1)^k tr ∧^k P / |det(I-P)| = -1 per orbit");
        rows_verdict(&mut report, "product_sum_closed_form", "lambda=", "product, log-sum, closed form and sdet identity");
        if !p.zero_alphas.is_empty() {
            rows_verdict(&mut report, "zeta_at_zero", "zeta-at-zero/", "closed form against the trace recursion");
        }
        report
    }
}

//! Analytic torsion of the twisted circle from its zeta-regularized
//! Laplacian, against `2|sin(θ/2)|`, across radii, and against the
//! combinatorial torsion of the one-cell complex.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::report::{ExperimentReport, Provenance, ReportRow};
use flatdet::twisted::{build_twisted_cochain, circle, combinatorial_torsion};
use flatdet::zeta::circle_torsion;

use super::{rows_verdict, Experiment};
use crate::config::{Angle, ExperimentId, Grid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    #[serde(deserialize_with = "crate::config::angle_list")]
    pub theta: Vec<Angle>,
    pub radii: Grid,
    pub cheeger_muller: bool,
}

impl Default for Params {
    fn default() -> Self {
        use std::f64::consts::PI;
        Params {
            theta: vec![Angle(PI / 4.0), Angle(PI / 2.0), Angle(2.0 * PI / 3.0), Angle(PI), Angle(3.0)],
            radii: Grid(vec![0.5, 1.0, 2.0, 4.0]),
            cheeger_muller: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub torsion: f64,
    pub radius_invariance: f64,
    pub cheeger_muller: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { torsion: 1e-8, radius_invariance: 1e-8, cheeger_muller: 1e-8 }
    }
}

pub struct CircleTorsion;

impl Experiment for CircleTorsion {
    const ID: ExperimentId = ExperimentId::CircleTorsion;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        if p.theta.is_empty() || p.radii.0.is_empty() {
            return Err("parameters.theta and parameters.radii must be nonempty".into());
        }
        if let Some(r) = p.radii.0.iter().find(|r| !(**r > 0.0)) {
            return Err(format!("parameters.radii: radius {r} is not positive"));
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, _seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let pairs: Vec<(f64, f64)> =
            p.theta.iter().flat_map(|t| p.radii.0.iter().map(move |&r| (t.0, r))).collect();
        let values: Vec<_> = pairs.par_iter().map(|&(theta, r)| circle_torsion(theta, r)).collect();
        let mut spread = 0.0f64;
        let mut cm_defect = 0.0f64;
        for (th, chunk) in p.theta.iter().zip(pairs.chunks(p.radii.0.len()).zip(values.chunks(p.radii.0.len()))) {
            let theta = th.0;
            let reference = 2.0 * (theta / 2.0).sin().abs();
            let mut ok = Vec::new();
            for (&(_, r), v) in chunk.0.iter().zip(chunk.1) {
                match v {
                    Ok(v) => {
                        ok.push(*v);
                        report.rows.push(ReportRow::real(
                            format!("torsion/theta={theta}/radius={r}"),
                            json!({ "theta": theta, "radius": r }),
                            *v,
                            reference,
                            Provenance::DerivedOracle,
                            tol.torsion,
                        ));
                    }
                    Err(e) => report.failures.push(format!("torsion/theta={theta}/radius={r}: {e}")),
                }
            }
            if let (Some(lo), Some(hi)) = (ok.iter().copied().reduce(f64::min), ok.iter().copied().reduce(f64::max)) {
                spread = spread.max(hi - lo);
            }
            if p.cheeger_muller {
                let comb = build_twisted_cochain(&circle(theta)).and_then(|d| combinatorial_torsion(&d));
                match (comb, ok.first()) {
                    (Ok(c), Some(&a)) => cm_defect = cm_defect.max((c.torsion - a).abs()),
                    (Err(e), _) => report.failures.push(format!("cheeger-muller/theta={theta}: {e}")),
                    _ => {}
                }
            }
        }
        report.metric("max_radius_spread", spread);
        rows_verdict(&mut report, "torsion_closed_form", "torsion/", "spectral torsion against 2|sin(θ/2)|");
        report.verdict(
            "radius_invariance",
            spread <= tol.radius_invariance,
            format!("max spread over radii {spread:e}"),
        );
        if p.cheeger_muller {
            report.metric("max_cheeger_muller_defect", cm_defect);
            report.verdict(
                "cheeger_muller",
                cm_defect <= tol.cheeger_muller,
                format!("max |combinatorial - spectral| = {cm_defect:e}"),
            );
        }
        report
    }
}

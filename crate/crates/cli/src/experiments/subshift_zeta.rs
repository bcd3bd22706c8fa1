//! Ruelle zeta of a suspended subshift of finite type: the value at zero is
//! independent of the roof, and above the abscissa the Euler product matches
//! the transfer determinant.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::json;

use flatdet::graded::random::rng_from_seed;
use flatdet::linalg::{real, C64};
use flatdet::report::{ExperimentReport, Provenance, ReportRow};
use flatdet::ruelle::{ruelle_zeta_truncated, subshift_catalog, zeta_transfer_determinant, Subshift};

use super::{case_seed, record, rows_verdict, Experiment};
use crate::config::{Angle, ExperimentId};

/// 0/1 matrix given as nested lists or as `"1,1;1,0"`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BinaryMatrix(pub Vec<Vec<u8>>);

pub fn parse_binary_matrix(text: &str) -> Result<Vec<Vec<u8>>, String> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<u8>().map_err(|_| format!("cannot read {x:?} in matrix {text:?}")))
                .collect()
        })
        .collect()
}

impl<'de> Deserialize<'de> for BinaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Rows(Vec<Vec<u8>>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Rows(m) => Ok(BinaryMatrix(m)),
            Raw::Text(s) => parse_binary_matrix(&s).map(BinaryMatrix).map_err(de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub matrix: BinaryMatrix,
    pub roof: Vec<f64>,
    #[serde(deserialize_with = "crate::config::angle_list")]
    pub alphas: Vec<Angle>,
    pub families: u64,
    pub roof_min: f64,
    pub roof_max: f64,
    pub path_steps: usize,
    pub n_max: usize,
    pub lambda_offset: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            matrix: BinaryMatrix(vec![vec![1, 1], vec![1, 0]]),
            roof: vec![1.0, 1.0],
            alphas: vec![Angle(PI), Angle(PI / 2.0)],
            families: 10,
            roof_min: 0.1,
            roof_max: 5.0,
            path_steps: 10,
            n_max: 40,
            lambda_offset: 0.6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub roof_independence: f64,
    pub determinant: f64,
    pub euler_product: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { roof_independence: 1e-15, determinant: 1e-15, euler_product: 1e-8 }
    }
}

pub struct SubshiftZeta;

/// `det(I - e^{iα} M)` by the permutation expansion.
fn leibniz_det(m: &[Vec<u8>], alpha: f64) -> C64 {
    let k = m.len();
    let e = C64::from_polar(1.0, alpha);
    let entry = |i: usize, j: usize| real(if i == j { 1.0 } else { 0.0 }) - e * m[i][j] as f64;
    let mut perm: Vec<usize> = (0..k).collect();
    let mut total = real(0.0);
    // Heap's algorithm with the sign flipping on each swap
    let mut counters = vec![0usize; k];
    let mut sign = 1.0;
    let term = |perm: &[usize]| perm.iter().enumerate().fold(real(1.0), |acc, (i, &j)| acc * entry(i, j));
    total += term(&perm) * sign;
    let mut i = 0;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            total += term(&perm) * sign;
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    total
}

fn shift(matrix: &BinaryMatrix, roof: Vec<f64>) -> flatdet::Result<Subshift> {
    Subshift::new(matrix.0.clone(), roof)
}

impl Experiment for SubshiftZeta {
    const ID: ExperimentId = ExperimentId::SubshiftZeta;
    type Params = Params;
    type Tolerances = Tolerances;

    fn validate(p: &Params) -> Result<(), String> {
        shift(&p.matrix, p.roof.clone()).map_err(|e| format!("parameters.matrix/roof: {e}"))?;
        if p.matrix.0.len() > 8 {
            return Err("parameters.matrix: at most 8 states".into());
        }
        if !(p.roof_min > 0.0 && p.roof_max >= p.roof_min) {
            return Err("parameters.roof_min and roof_max need 0 < roof_min ≤ roof_max".into());
        }
        Ok(())
    }

    fn run(p: &Params, tol: &Tolerances, seed: u64) -> ExperimentReport {
        let mut report = ExperimentReport::default();
        let Some(base) = record(&mut report, "subshift", shift(&p.matrix, p.roof.clone())) else { return report };
        let k = base.states();
        let mut rng = rng_from_seed(case_seed(seed, 5, 0));
        let random_roofs: Vec<Vec<f64>> = (0..p.families)
            .map(|_| (0..k).map(|_| rng.random_range(p.roof_min..=p.roof_max)).collect())
            .collect();
        let direction: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();

        let mut spread = 0.0f64;
        for alpha in p.alphas.iter().map(|a| a.0) {
            let value = zeta_transfer_determinant(&base, alpha, real(0.0));
            report.rows.push(ReportRow::complex(
                format!("determinant/alpha={alpha}"),
                json!({ "alpha": alpha, "roof": p.roof }),
                value,
                leibniz_det(&p.matrix.0, alpha),
                Provenance::DerivedOracle,
                tol.determinant,
            ));
            let mut families: Vec<(String, Vec<f64>)> = random_roofs
                .iter()
                .enumerate()
                .map(|(i, r)| (format!("random={i}"), r.clone()))
                .collect();
            for step in 0..=p.path_steps {
                let tau = step as f64 / p.path_steps.max(1) as f64;
                let r = p.roof.iter().zip(&direction).map(|(r, d)| r * (1.0 + tau * d)).collect();
                families.push((format!("path={tau}"), r));
            }
            for (name, roof) in families {
                let case = format!("roof-family/alpha={alpha}/{name}");
                let Some(s) = record(&mut report, &case, shift(&p.matrix, roof.clone())) else { continue };
                let v = zeta_transfer_determinant(&s, alpha, real(0.0));
                let d = (v - value).norm();
                spread = spread.max(d);
                let mut row = ReportRow::deviation(case, json!({ "alpha": alpha, "roof": roof }), d, Provenance::InternalCrosscheck, tol.roof_independence);
                row.value = flatdet::report::complex_json(v);
                report.rows.push(row);
            }
        }
        report.metric("max_roof_spread", spread);

        let euler: Vec<_> = p
            .alphas
            .par_iter()
            .map(|a| -> flatdet::Result<ReportRow> {
                let catalog = subshift_catalog(&base, p.n_max, a.0)?;
                let lambda = real(catalog.abscissa() + p.lambda_offset);
                let z = ruelle_zeta_truncated(&catalog, lambda)?;
                let det = zeta_transfer_determinant(&base, a.0, lambda);
                let mut row = ReportRow::complex(
                    format!("euler-product/alpha={}", a.0),
                    json!({ "alpha": a.0, "lambda": lambda.re, "n_max": p.n_max }),
                    z.value,
                    det,
                    Provenance::InternalCrosscheck,
                    tol.euler_product + z.tail_bound,
                );
                row.inputs["tail_bound"] = json!(z.tail_bound);
                Ok(row)
            })
            .collect();
        for (a, r) in p.alphas.iter().zip(euler) {
            if let Some(row) = record(&mut report, &format!("euler-product/alpha={}", a.0), r) {
                report.rows.push(row);
            }
        }

        rows_verdict(&mut report, "determinant_oracle", "determinant/", "det(I - e^{iα}M) by permutation expansion");
        rows_verdict(&mut report, "roof_independence", "roof-family/", "value at λ = 0 across roof families");
        rows_verdict(&mut report, "euler_product", "euler-product/", "truncated product against the transfer determinant");
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flatdet::linalg::c;

    #[test]
    fn leibniz_golden_mean() {
        let m = vec![vec![1, 1], vec![1, 0]];
        assert!((leibniz_det(&m, PI) - 1.0).norm() < 1e-15);
        assert!((leibniz_det(&m, PI / 2.0) - c(2.0, -1.0)).norm() < 1e-15);
        // 3-cycle: det(I - xP) = 1 - x³
        let p = vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]];
        let x = C64::from_polar(1.0, 0.4);
        assert!((leibniz_det(&p, 0.4) - (1.0 - x * x * x)).norm() < 1e-14);
    }

    #[test]
    fn matrix_text() {
        assert_eq!(parse_binary_matrix("1,1;1,0").unwrap(), vec![vec![1, 1], vec![1, 0]]);
        let m: BinaryMatrix = serde_json::from_str("\"1,0;0,1\"").unwrap();
        assert_eq!(m.0, vec![vec![1, 0], vec![0, 1]]);
        assert!(parse_binary_matrix("1,x").is_err());
    }
}

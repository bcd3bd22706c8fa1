//! Structured experiment reports shared by the library and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::linalg::C64;

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Independent oracle (closed form, brute force, second algorithm).
    DerivedOracle,
    /// Value that holds by inspection.
    Trivial,
    /// Agreement between two internal code paths.
    InternalCrosscheck,
}

/// One computed case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    pub inputs: Value,
    pub value: Value,
    pub reference: Option<Value>,
    pub provenance: Provenance,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    pub pass: bool,
}

impl ReportRow {
    /// Row comparing a complex value against a complex reference.
    pub fn complex(case: impl Into<String>, inputs: Value, value: C64, reference: C64, provenance: Provenance, tol: f64) -> Self {
        let abs = (value - reference).norm();
        let rel = if reference.norm() > 0.0 { abs / reference.norm() } else { abs };
        ReportRow {
            case: case.into(),
            inputs,
            value: complex_json(value),
            reference: Some(complex_json(reference)),
            provenance,
            abs_error: Some(abs),
            rel_error: Some(rel),
            pass: rel.min(abs) <= tol,
        }
    }

    /// Row comparing real numbers.
    pub fn real(case: impl Into<String>, inputs: Value, value: f64, reference: f64, provenance: Provenance, tol: f64) -> Self {
        let abs = (value - reference).abs();
        let rel = if reference != 0.0 { abs / reference.abs() } else { abs };
        ReportRow {
            case: case.into(),
            inputs,
            value: json!(value),
            reference: Some(json!(reference)),
            provenance,
            abs_error: Some(abs),
            rel_error: Some(rel),
            pass: rel.min(abs) <= tol,
        }
    }

    /// Row recording a deviation that must stay below `tol`.
    pub fn deviation(case: impl Into<String>, inputs: Value, deviation: f64, provenance: Provenance, tol: f64) -> Self {
        ReportRow {
            case: case.into(),
            inputs,
            value: json!(deviation),
            reference: Some(json!(0.0)),
            provenance,
            abs_error: Some(deviation),
            rel_error: None,
            pass: deviation <= tol,
        }
    }
}

/// Named pass/fail decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Record of one experiment run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: Value,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config: Value) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config,
            ..Default::default()
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    /// True when every verdict passes and nothing failed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    /// Fold another report's rows, verdicts and failures into this one,
    /// prefixing names with `prefix`.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        for mut row in other.rows {
            row.case = format!("{prefix}{}", row.case);
            self.rows.push(row);
        }
        for mut v in other.verdicts {
            v.name = format!("{prefix}{}", v.name);
            self.verdicts.push(v);
        }
        for (k, v) in other.metrics {
            self.metrics.insert(format!("{prefix}{k}"), v);
        }
        self.failures
            .extend(other.failures.into_iter().map(|f| format!("{prefix}{f}")));
    }

    /// Rows as CSV text.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("case,provenance,value,reference,abs_error,rel_error,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&r.case),
                serde_json::to_value(r.provenance)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                csv_field(&r.value.to_string()),
                csv_field(&r.reference.as_ref().map(Value::to_string).unwrap_or_default()),
                r.abs_error.map(|e| format!("{e:e}")).unwrap_or_default(),
                r.rel_error.map(|e| format!("{e:e}")).unwrap_or_default(),
                r.pass
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Complex number as a `[re, im]` JSON pair.
pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_pass_on_tolerance() {
        let row = ReportRow::real("x", json!({}), 1.0 + 1e-12, 1.0, Provenance::Trivial, 1e-10);
        assert!(row.pass);
        let row = ReportRow::complex("z", json!({}), C64::new(0.0, 1.0), C64::new(0.0, 1.1), Provenance::DerivedOracle, 1e-3);
        assert!(!row.pass);
    }

    #[test]
    fn provenance_tags_serialize_kebab_case() {
        let v = serde_json::to_value(Provenance::InternalCrosscheck).unwrap();
        assert_eq!(v, json!("internal-crosscheck"));
    }

    #[test]
    fn csv_quotes_commas() {
        let mut r = ExperimentReport::new("e", json!({}));
        r.rows.push(ReportRow::complex("a", json!({}), C64::new(1.0, 2.0), C64::new(1.0, 2.0), Provenance::Trivial, 0.0));
        let csv = r.rows_csv();
        assert!(csv.contains("\"[1.0,2.0]\""));
    }
}

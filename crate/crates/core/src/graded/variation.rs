use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{self, real, C64};
use crate::quadrature::integrate_gl;
use crate::report::{complex_json, ExperimentReport, Provenance, ReportRow};

use super::map::{commutator, graded_commutator, GradedMap};
use super::splitting::{sdet_restricted, split_complement};

/// Local error target of the generator-mode integrator.
pub const FLOW_TOL: f64 = 1e-12;
/// Anomaly-ledger tolerance.
pub const ANOMALY_TOL: f64 = 1e-8;
/// Exact-constancy tolerance for supertraceless variations.
pub const CONSTANCY_TOL: f64 = 1e-9;

type ConjugatorFn = dyn Fn(f64) -> (GradedMap, GradedMap) + Send + Sync;

/// A conjugating family β_τ with β_0 = identity.
#[derive(Clone)]
pub enum ConjugatorPath {
    /// β_τ = exp(τΘ).
    Exponential(GradedMap),
    /// β_τ = I + Σ_{j≥1} τ^j B_j, coefficients listed from j = 1.
    Polynomial(Vec<GradedMap>),
    /// Arbitrary family returning (β_τ, dβ_τ/dτ).
    Custom(Arc<ConjugatorFn>),
}

impl fmt::Debug for ConjugatorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjugatorPath::Exponential(_) => write!(f, "Exponential"),
            ConjugatorPath::Polynomial(c) => write!(f, "Polynomial(degree {})", c.len()),
            ConjugatorPath::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A family δ_τ with dδ_τ/dτ = [θ_τ, δ_τ].
#[derive(Clone, Debug)]
pub enum InnerVariation {
    /// θ_τ = Σ_j τ^j Θ_j, coefficients listed from j = 0.
    Generator(Vec<GradedMap>),
    /// δ_τ = β_τ δ_0 β_τ^{-1}, θ_τ = β'_τ β_τ^{-1}.
    Conjugator(ConjugatorPath),
}

fn poly_eval(coeffs: &[GradedMap], tau: f64, dims: &[usize]) -> Result<GradedMap> {
    let mut acc = GradedMap::zero(dims, 0);
    for c in coeffs.iter().rev() {
        acc = acc.scale(real(tau)).add(c)?;
    }
    Ok(acc)
}

impl InnerVariation {
    /// The zero variation.
    pub fn trivial(dims: &[usize]) -> Self {
        InnerVariation::Generator(vec![GradedMap::zero(dims, 0)])
    }

    /// (β_τ, β'_τ) for conjugator mode.
    pub fn beta(&self, dims: &[usize], tau: f64) -> Result<Option<(GradedMap, GradedMap)>> {
        let InnerVariation::Conjugator(path) = self else {
            return Ok(None);
        };
        let pair = match path {
            ConjugatorPath::Exponential(theta) => {
                let b = theta.map_blocks(|_, blk| linalg::expm(&(blk * real(tau))));
                let db = theta.compose(&b)?;
                (b, db)
            }
            ConjugatorPath::Polynomial(coeffs) => {
                let mut b = GradedMap::identity(dims);
                let mut db = GradedMap::zero(dims, 0);
                for (i, c) in coeffs.iter().enumerate() {
                    let j = i as i32 + 1;
                    b = b.add(&c.scale(real(tau.powi(j))))?;
                    db = db.add(&c.scale(real(j as f64 * tau.powi(j - 1))))?;
                }
                (b, db)
            }
            ConjugatorPath::Custom(f) => f(tau),
        };
        Ok(Some(pair))
    }

    /// θ_τ.
    pub fn theta(&self, dims: &[usize], tau: f64) -> Result<GradedMap> {
        match self {
            InnerVariation::Generator(coeffs) => poly_eval(coeffs, tau, dims),
            InnerVariation::Conjugator(ConjugatorPath::Exponential(theta)) => Ok(theta.clone()),
            InnerVariation::Conjugator(_) => {
                let (b, db) = self.beta(dims, tau)?.expect("conjugator mode");
                let inv = invert(&b)?;
                db.compose(&inv)
            }
        }
    }
}

fn invert(b: &GradedMap) -> Result<GradedMap> {
    let blocks = (0..b.degrees())
        .map(|k| linalg::inverse(b.block(k), &format!("β at degree {k}")))
        .collect::<Result<Vec<_>>>()?;
    GradedMap::new(b.dims().to_vec(), 0, blocks)
}

/// δ_τ along an inner variation starting at δ_0.
pub fn inner_variation_path(delta0: &GradedMap, variation: &InnerVariation, tau: f64) -> Result<GradedMap> {
    let dims = delta0.dims().to_vec();
    match variation {
        InnerVariation::Conjugator(_) => {
            let (b, _) = variation.beta(&dims, tau)?.expect("conjugator mode");
            let inv = invert(&b)?;
            b.compose(delta0)?.compose(&inv)
        }
        InnerVariation::Generator(_) => integrate_flow(delta0, variation, tau),
    }
}

/// Adaptive RK4 with step doubling for dδ/dτ = [θ_τ, δ].
fn integrate_flow(delta0: &GradedMap, variation: &InnerVariation, tau_end: f64) -> Result<GradedMap> {
    let dims = delta0.dims().to_vec();
    let rhs = |tau: f64, delta: &GradedMap| -> Result<GradedMap> {
        commutator(&variation.theta(&dims, tau)?, delta)
    };
    let rk4 = |tau: f64, y: &GradedMap, h: f64| -> Result<GradedMap> {
        let k1 = rhs(tau, y)?;
        let k2 = rhs(tau + 0.5 * h, &y.add(&k1.scale(real(0.5 * h)))?)?;
        let k3 = rhs(tau + 0.5 * h, &y.add(&k2.scale(real(0.5 * h)))?)?;
        let k4 = rhs(tau + h, &y.add(&k3.scale(real(h)))?)?;
        let incr = k1.add(&k2.scale(real(2.0)))?.add(&k3.scale(real(2.0)))?.add(&k4)?;
        y.add(&incr.scale(real(h / 6.0)))
    };
    let mut y = delta0.clone();
    let mut tau = 0.0;
    if tau_end == 0.0 {
        return Ok(y);
    }
    let dir = tau_end.signum();
    let mut h = dir * (tau_end.abs() / 16.0).min(0.05);
    let mut steps = 0usize;
    while (tau_end - tau) * dir > 1e-15 {
        if (tau + h - tau_end) * dir > 0.0 {
            h = tau_end - tau;
        }
        let full = rk4(tau, &y, h)?;
        let half = rk4(tau, &y, 0.5 * h)?;
        let two_half = rk4(tau + 0.5 * h, &half, 0.5 * h)?;
        let err = two_half.sub(&full)?.norm() / 15.0;
        let scale = y.norm().max(1.0);
        if err <= FLOW_TOL * scale {
            // Richardson-corrected step
            y = two_half.add(&two_half.sub(&full)?.scale(real(1.0 / 15.0)))?;
            tau += h;
            let grow = if err == 0.0 { 2.0 } else { (0.9 * (FLOW_TOL * scale / err).powf(0.2)).min(2.0) };
            h *= grow;
        } else {
            h *= (0.9 * (FLOW_TOL * scale / err).powf(0.2)).max(0.2);
        }
        steps += 1;
        if steps > 1_000_000 || h.abs() < 1e-14 {
            return Err(Error::Contract("commutator flow integration stalled".into()));
        }
    }
    Ok(y)
}

/// ∫_a^b str θ_σ dσ by composite Gauss–Legendre.
pub fn integrate_supertrace(variation: &InnerVariation, dims: &[usize], a: f64, b: f64) -> Result<C64> {
    let err = RefCell::new(None);
    let value = integrate_gl(
        |s| match variation.theta(dims, s) {
            Ok(th) => th.supertrace(),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                real(0.0)
            }
        },
        a,
        b,
        4,
        12,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Sweep `tau_grid`, compare log sdet(D_τ|_{L_τ}) with the anomaly
/// prediction log sdet_0 + ∫_0^τ str θ, and check exact constancy when θ is
/// supertraceless on the grid.
pub fn constancy_report(delta0: &GradedMap, d: &GradedMap, variation: &InnerVariation, tau_grid: &[f64]) -> Result<ExperimentReport> {
    let dims = delta0.dims().to_vec();
    let mut report = ExperimentReport::new(
        "constancy",
        json!({ "dims": dims, "tau_grid": tau_grid }),
    );
    let big_d0 = graded_commutator(delta0, d)?;
    let base = sdet_restricted(&big_d0, &split_complement(delta0)?)?;
    let mut max_anomaly = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut supertraceless = true;
    let mut sorted: Vec<f64> = tau_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    // integrate outward from 0 in both directions
    let positives: Vec<f64> = sorted.iter().copied().filter(|t| *t >= 0.0).collect();
    let negatives: Vec<f64> = sorted.iter().rev().copied().filter(|t| *t < 0.0).collect();
    for branch in [positives, negatives] {
        let mut prev_tau = 0.0;
        let mut integral = real(0.0);
        for tau in branch {
            integral += integrate_supertrace(variation, &dims, prev_tau, tau)?;
            prev_tau = tau;
            let theta = variation.theta(&dims, tau)?;
            let str_theta = theta.supertrace();
            if str_theta.norm() > 1e-12 * theta.norm().max(1.0) {
                supertraceless = false;
            }
            let point = (|| -> Result<_> {
                let delta = inner_variation_path(delta0, variation, tau)?;
                let big_d = graded_commutator(&delta, d)?;
                let split = split_complement(&delta)?;
                sdet_restricted(&big_d, &split)
            })();
            match point {
                Ok(v) => {
                    let predicted = base.log + integral;
                    let anomaly = linalg::wrap_2pi_i(v.log - predicted).norm();
                    let drift = ((v.log - base.log).exp() - 1.0).norm();
                    max_anomaly = max_anomaly.max(anomaly);
                    max_drift = max_drift.max(drift);
                    let mut row = ReportRow::deviation(
                        format!("tau={tau}"),
                        json!({ "tau": tau, "str_theta": complex_json(str_theta) }),
                        anomaly,
                        Provenance::InternalCrosscheck,
                        ANOMALY_TOL,
                    );
                    row.value = json!({
                        "log_sdet": complex_json(v.log),
                        "anomaly_defect": anomaly,
                        "relative_drift": drift,
                    });
                    row.reference = Some(complex_json(predicted));
                    report.rows.push(row);
                }
                Err(e) => report.failures.push(format!("tau={tau}: {e}")),
            }
        }
    }
    report.metric("max_anomaly_defect", max_anomaly);
    report.metric("max_relative_drift", max_drift);
    report.verdict(
        "anomaly_ledger",
        max_anomaly <= ANOMALY_TOL,
        format!("max |log sdet_τ - log sdet_0 - ∫str θ| = {max_anomaly:e}"),
    );
    if supertraceless {
        report.verdict(
            "exact_constancy",
            max_drift <= CONSTANCY_TOL,
            format!("max |sdet_τ/sdet_0 - 1| = {max_drift:e}"),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, zeros};

    fn toy() -> (GradedMap, GradedMap) {
        let d = GradedMap::new(vec![1, 1], 1, vec![from_real_rows(&[&[2.0]]), zeros(0, 1)]).unwrap();
        let delta = GradedMap::new(vec![1, 1], -1, vec![zeros(0, 1), from_real_rows(&[&[3.0]])]).unwrap();
        (d, delta)
    }

    fn diag(a: f64, b: f64) -> GradedMap {
        GradedMap::new(vec![1, 1], 0, vec![from_real_rows(&[&[a]]), from_real_rows(&[&[b]])]).unwrap()
    }

    #[test]
    fn toy_conjugation() {
        let (_, delta) = toy();
        let var = InnerVariation::Conjugator(ConjugatorPath::Exponential(diag(1.0, 0.0)));
        let dt = inner_variation_path(&delta, &var, 0.7).unwrap();
        assert!((dt.block(1)[(0, 0)] - 3.0 * 0.7f64.exp()).norm() < 1e-13);
        let flow = inner_variation_path(&delta, &InnerVariation::Generator(vec![diag(1.0, 0.0)]), 0.7).unwrap();
        assert!((flow.block(1)[(0, 0)] - 3.0 * 0.7f64.exp()).norm() < 1e-10);
    }

    #[test]
    fn toy_anomaly_law() {
        let (d, delta) = toy();
        let var = InnerVariation::Conjugator(ConjugatorPath::Exponential(diag(1.0, 0.0)));
        let rep = constancy_report(&delta, &d, &var, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.metrics["max_anomaly_defect"] < 1e-12);
        assert!(!rep.verdicts.iter().any(|v| v.name == "exact_constancy"));
    }

    #[test]
    fn toy_supertraceless_is_constant() {
        let (d, delta) = toy();
        let var = InnerVariation::Conjugator(ConjugatorPath::Exponential(diag(0.4, 0.4)));
        let rep = constancy_report(&delta, &d, &var, &[-0.5, 0.0, 0.5, 1.0]).unwrap();
        assert!(rep.passed());
        assert!(rep.metrics["max_relative_drift"] < 1e-12);
    }

    #[test]
    fn trivial_variation_is_constant() {
        let (d, delta) = toy();
        let var = InnerVariation::trivial(&[1, 1]);
        let dt = inner_variation_path(&delta, &var, 0.3).unwrap();
        assert_eq!(dt, delta);
        let rep = constancy_report(&delta, &d, &var, &[0.0, 0.5]).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn singular_conjugator_is_reported() {
        let (_, delta) = toy();
        let var = InnerVariation::Conjugator(ConjugatorPath::Polynomial(vec![diag(-1.0, 0.0)]));
        assert!(matches!(inner_variation_path(&delta, &var, 1.0), Err(Error::Singular(_))));
    }
}

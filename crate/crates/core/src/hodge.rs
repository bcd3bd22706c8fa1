//! Gram-metric families, adjoint codifferentials, Hodge Laplacians and the
//! metric anomaly ledger.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graded::random::{random_matrix, random_positive_gram, rng_from_seed};
use crate::graded::{graded_commutator, sdet_restricted, split_complement, ConjugatorPath, GradedMap, InnerVariation};
use crate::linalg::{self, matrix_from_rows, matrix_to_rows, real, CMat};
use crate::report::{complex_json, ExperimentReport, Provenance, ReportRow};

/// Smallest admissible Gram eigenvalue.
pub const MIN_GRAM_EIGENVALUE: f64 = 1e-10;
/// Step for the Richardson-extrapolated derivative of custom paths.
pub const GRAM_FD_STEP: f64 = 1e-5;
/// Ledger tolerance.
pub const LEDGER_TOL: f64 = 1e-8;
/// Constancy tolerance for supervolume-preserving families.
pub const NORMALIZED_TOL: f64 = 1e-9;

type CustomGram = dyn Fn(f64) -> CMat + Send + Sync;

/// A τ-dependent Gram matrix for one degree.
#[derive(Clone)]
pub enum GramPath {
    Constant(CMat),
    /// `E† G0 E` with `E = exp(τH/2)`.
    ExpLinear { g0: CMat, h: CMat },
    /// `Σ_j τ^j C_j`.
    Polynomial(Vec<CMat>),
    /// Arbitrary path; its derivative is taken numerically.
    Custom(Arc<CustomGram>),
}

impl fmt::Debug for GramPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GramPath::Constant(g) => write!(f, "Constant({}x{})", g.nrows(), g.ncols()),
            GramPath::ExpLinear { g0, .. } => write!(f, "ExpLinear({}x{})", g0.nrows(), g0.ncols()),
            GramPath::Polynomial(c) => write!(f, "Polynomial(degree {})", c.len().saturating_sub(1)),
            GramPath::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl GramPath {
    /// Scalar path `e^{2cτ} I` in dimension `n`.
    pub fn exp_scalar(n: usize, c: f64) -> Self {
        GramPath::ExpLinear {
            g0: linalg::identity(n),
            h: linalg::identity(n) * real(2.0 * c),
        }
    }

    pub fn value(&self, tau: f64) -> CMat {
        match self {
            GramPath::Constant(g) => g.clone(),
            GramPath::ExpLinear { g0, h } => {
                let e = linalg::expm(&(h * real(0.5 * tau)));
                e.adjoint() * g0 * e
            }
            GramPath::Polynomial(coeffs) => {
                let n = coeffs.first().map_or(0, |c| c.nrows());
                coeffs
                    .iter()
                    .rev()
                    .fold(linalg::zeros(n, n), |acc, c| acc * real(tau) + c)
            }
            GramPath::Custom(f) => f(tau),
        }
    }

    pub fn derivative(&self, tau: f64) -> CMat {
        match self {
            GramPath::Constant(g) => linalg::zeros(g.nrows(), g.ncols()),
            GramPath::ExpLinear { h, .. } => {
                let g = self.value(tau);
                let half = h * real(0.5);
                half.adjoint() * &g + g * half
            }
            GramPath::Polynomial(coeffs) => {
                let n = coeffs.first().map_or(0, |c| c.nrows());
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(linalg::zeros(n, n), |acc, (j, c)| acc * real(tau) + c * real(j as f64))
            }
            GramPath::Custom(f) => {
                let h = GRAM_FD_STEP;
                let central = |h: f64| (f(tau + h) - f(tau - h)) * real(0.5 / h);
                let coarse = central(h);
                let fine = central(0.5 * h);
                (fine * real(4.0) - coarse) * real(1.0 / 3.0)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.value(0.0).nrows()
    }
}

/// Per-degree Gram paths, optionally rescaled in one degree so that the
/// supervolume Σ_k (-1)^k log det G_k stays at its τ = 0 value.
#[derive(Clone, Debug)]
pub struct MetricFamily {
    pub paths: Vec<GramPath>,
    /// Degree carrying the supervolume rescaling, if normalized.
    pub normalized_degree: Option<usize>,
}

impl MetricFamily {
    pub fn new(paths: Vec<GramPath>) -> Self {
        MetricFamily {
            paths,
            normalized_degree: None,
        }
    }

    pub fn constant(grams: Vec<CMat>) -> Self {
        Self::new(grams.into_iter().map(GramPath::Constant).collect())
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::constant(dims.iter().map(|&m| linalg::identity(m)).collect())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.paths.iter().map(GramPath::dim).collect()
    }

    fn raw_supervolume(&self, tau: f64) -> f64 {
        self.paths
            .iter()
            .enumerate()
            .map(|(k, p)| sign_f(k) * log_det_hpd(&p.value(tau)))
            .sum()
    }

    fn raw_supervolume_derivative(&self, tau: f64) -> f64 {
        self.paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.dim() > 0)
            .map(|(k, p)| {
                let g = p.value(tau);
                let inv = linalg::inverse(&g, "Gram").unwrap_or_else(|_| linalg::zeros(g.nrows(), g.ncols()));
                sign_f(k) * linalg::trace(&(inv * p.derivative(tau))).re
            })
            .sum()
    }

    /// Scalar factor applied to each degree at τ (all 1 unless normalized).
    pub fn rescale_factors(&self, tau: f64) -> Vec<f64> {
        let mut f = vec![1.0; self.paths.len()];
        if let Some(j) = self.normalized_degree {
            let phi = self.raw_supervolume(tau) - self.raw_supervolume(0.0);
            let m = self.paths[j].dim() as f64;
            f[j] = (-sign_f(j) * phi / m).exp();
        }
        f
    }

    pub fn grams(&self, tau: f64) -> Vec<CMat> {
        let f = self.rescale_factors(tau);
        self.paths
            .iter()
            .zip(f)
            .map(|(p, s)| p.value(tau) * real(s))
            .collect()
    }

    pub fn gram_derivatives(&self, tau: f64) -> Vec<CMat> {
        let f = self.rescale_factors(tau);
        let mut out: Vec<CMat> = self
            .paths
            .iter()
            .zip(&f)
            .map(|(p, &s)| p.derivative(tau) * real(s))
            .collect();
        if let Some(j) = self.normalized_degree {
            let m = self.paths[j].dim() as f64;
            let dlog = -sign_f(j) * self.raw_supervolume_derivative(tau) / m;
            out[j] += self.paths[j].value(tau) * real(f[j] * dlog);
        }
        out
    }

    /// Σ_k (-1)^k log det G_k(τ).
    pub fn supervolume(&self, tau: f64) -> f64 {
        self.grams(tau)
            .iter()
            .enumerate()
            .map(|(k, g)| sign_f(k) * log_det_hpd(g))
            .sum()
    }

    /// Check positivity of every Gram at τ.
    pub fn validate(&self, tau: f64) -> Result<()> {
        for (k, g) in self.grams(tau).iter().enumerate() {
            check_gram(g, k)?;
        }
        Ok(())
    }
}

fn sign_f(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn log_det_hpd(g: &CMat) -> f64 {
    linalg::log_det(g).re
}

fn check_gram(g: &CMat, k: usize) -> Result<()> {
    if g.nrows() == 0 {
        return Ok(());
    }
    let (min, skew) = linalg::hermitian_min_eigenvalue(g);
    let scale = linalg::norm(g).max(1.0);
    if skew > 1e-10 * scale {
        return Err(Error::Metric(format!("Gram at degree {k} is not Hermitian (skew part {skew:e})")));
    }
    if min <= MIN_GRAM_EIGENVALUE {
        return Err(Error::Metric(format!(
            "Gram at degree {k} is not positive definite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// `δ^(k) = G_{k-1}^{-1} d^(k-1)† G_k`.
pub fn adjoint_codifferential(d: &GradedMap, grams: &[CMat]) -> Result<GradedMap> {
    if d.shift() != 1 {
        return Err(Error::Contract(format!("differential must have shift +1, got {}", d.shift())));
    }
    if grams.len() != d.degrees() {
        return Err(Error::Dimension {
            degree: grams.len().min(d.degrees()),
            detail: format!("{} Grams for {} degrees", grams.len(), d.degrees()),
        });
    }
    for (k, g) in grams.iter().enumerate() {
        if g.nrows() != d.dims()[k] || !g.is_square() {
            return Err(Error::Dimension {
                degree: k,
                detail: format!("Gram is {}x{}, degree has dimension {}", g.nrows(), g.ncols(), d.dims()[k]),
            });
        }
        check_gram(g, k)?;
    }
    let inverses = grams
        .iter()
        .enumerate()
        .map(|(k, g)| linalg::inverse(g, &format!("Gram at degree {k}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradedMap::from_fn(d.dims(), -1, |k, _, _| {
        &inverses[k - 1] * d.block(k - 1).adjoint() * &grams[k]
    }))
}

/// Hodge Laplacian `Δ = δd + dδ` with δ the Gram adjoint.
pub fn hodge_laplacian(d: &GradedMap, grams: &[CMat]) -> Result<(GradedMap, GradedMap)> {
    let delta = adjoint_codifferential(d, grams)?;
    let lap = graded_commutator(&delta, d)?;
    Ok((delta, lap))
}

/// Largest `|⟨dα, β⟩_G - ⟨α, δβ⟩_G|` over basis vectors, i.e.
/// `max_k ‖d^(k-1)† G_k - G_{k-1} δ^(k)‖`.
pub fn adjointness_defect(d: &GradedMap, delta: &GradedMap, grams: &[CMat]) -> f64 {
    (1..d.degrees())
        .map(|k| linalg::norm(&(d.block(k - 1).adjoint() * &grams[k] - &grams[k - 1] * delta.block(k))))
        .fold(0.0, f64::max)
}

/// Inner variation of the adjoint codifferential along a metric family:
/// β_τ = G(τ)^{-1} G(0), θ_τ = -G(τ)^{-1} Ġ(τ).
pub fn metric_inner_variation(family: &MetricFamily) -> Result<InnerVariation> {
    family.validate(0.0)?;
    let fam = family.clone();
    let dims = family.dims();
    let base = family.grams(0.0);
    let path = move |tau: f64| -> (GradedMap, GradedMap) {
        let g = fam.grams(tau);
        let dg = fam.gram_derivatives(tau);
        let inv: Vec<CMat> = g
            .iter()
            .map(|m| linalg::inverse(m, "Gram").unwrap_or_else(|_| m * real(f64::NAN)))
            .collect();
        let beta = GradedMap::from_fn(&dims, 0, |k, _, _| &inv[k] * &base[k]);
        let dbeta = GradedMap::from_fn(&dims, 0, |k, _, _| -(&inv[k] * &dg[k] * &inv[k] * &base[k]));
        (beta, dbeta)
    };
    Ok(InnerVariation::Conjugator(ConjugatorPath::Custom(Arc::new(path))))
}

/// Largest blockwise `‖δ_τ - β_τ δ_0 β_τ^{-1}‖` at `tau`.
pub fn conjugation_defect(d: &GradedMap, family: &MetricFamily, tau: f64) -> Result<f64> {
    let delta0 = adjoint_codifferential(d, &family.grams(0.0))?;
    let direct = adjoint_codifferential(d, &family.grams(tau))?;
    let var = metric_inner_variation(family)?;
    let conj = crate::graded::inner_variation_path(&delta0, &var, tau)?;
    Ok(direct.sub(&conj)?.norm())
}

/// Rescale the highest nonzero degree so that the supervolume is constant.
pub fn supervolume_normalize(family: &MetricFamily) -> MetricFamily {
    let j = (0..family.paths.len()).rev().find(|&k| family.paths[k].dim() > 0);
    MetricFamily {
        paths: family.paths.clone(),
        normalized_degree: j,
    }
}

/// Verify that `log sdet(Δ_τ|_{L_τ}) + Σ_k (-1)^k log det G_k(τ)` is constant
/// over `tau_grid`, plus exact constancy of sdet when the supervolume is
/// constant.
pub fn torsion_anomaly_experiment(d: &GradedMap, family: &MetricFamily, tau_grid: &[f64]) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "hodge-anomaly",
        json!({ "dims": d.dims(), "tau_grid": tau_grid }),
    );
    let sdet_at = |tau: f64| -> Result<crate::graded::SdetValue> {
        let grams = family.grams(tau);
        let (delta, lap) = hodge_laplacian(d, &grams)?;
        sdet_restricted(&lap, &split_complement(&delta)?)
    };
    let base = sdet_at(0.0)?;
    let sv0 = family.supervolume(0.0);
    let mut max_ledger = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut max_sv_drift = 0.0f64;
    for &tau in tau_grid {
        match sdet_at(tau) {
            Ok(v) => {
                let sv = family.supervolume(tau);
                let ledger = linalg::wrap_2pi_i(v.log - base.log + (sv - sv0)).norm();
                let drift = ((v.log - base.log).exp() - 1.0).norm();
                max_ledger = max_ledger.max(ledger);
                max_drift = max_drift.max(drift);
                max_sv_drift = max_sv_drift.max((sv - sv0).abs());
                let mut row = ReportRow::deviation(
                    format!("tau={tau}"),
                    json!({ "tau": tau, "supervolume": sv }),
                    ledger,
                    Provenance::InternalCrosscheck,
                    LEDGER_TOL,
                );
                row.value = json!({ "log_sdet": complex_json(v.log), "ledger_defect": ledger, "relative_drift": drift });
                report.rows.push(row);
            }
            Err(e) => report.failures.push(format!("tau={tau}: {e}")),
        }
    }
    report.metric("max_ledger_defect", max_ledger);
    report.metric("max_relative_drift", max_drift);
    report.metric("max_supervolume_drift", max_sv_drift);
    report.verdict(
        "anomaly_ledger",
        max_ledger <= LEDGER_TOL,
        format!("max |Δ log sdet + Δ supervolume| = {max_ledger:e}"),
    );
    if max_sv_drift <= 1e-12 {
        report.verdict(
            "exact_constancy",
            max_drift <= NORMALIZED_TOL,
            format!("max |sdet_τ/sdet_0 - 1| = {max_drift:e}"),
        );
    }
    Ok(report)
}

/// Exponential Gram paths `E† G0 E`, `E = exp(τH/2)`, with random positive
/// `G0` and random `H` of norm about `scale`.
pub fn random_metric_family(seed: u64, dims: &[usize], scale: f64) -> MetricFamily {
    let mut rng = rng_from_seed(seed);
    MetricFamily::new(
        dims.iter()
            .map(|&m| GramPath::ExpLinear {
                g0: random_positive_gram(&mut rng, m),
                h: random_matrix(&mut rng, m, m) * real(scale / (m.max(1) as f64).sqrt()),
            })
            .collect(),
    )
}

/// JSON form of a Gram path, tagged by `type`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GramPathJson {
    Constant { gram: Vec<Vec<[f64; 2]>> },
    ExpLinear { g0: Vec<Vec<[f64; 2]>>, h: Vec<Vec<[f64; 2]>> },
    Polynomial { coeffs: Vec<Vec<Vec<[f64; 2]>>> },
}

/// JSON form of a metric family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFamilyJson {
    pub degrees: Vec<GramPathJson>,
    #[serde(default)]
    pub normalize: bool,
}

impl MetricFamilyJson {
    pub fn to_family(&self) -> Result<MetricFamily> {
        let paths = self
            .degrees
            .iter()
            .map(|p| {
                Ok(match p {
                    GramPathJson::Constant { gram } => GramPath::Constant(square(gram)?),
                    GramPathJson::ExpLinear { g0, h } => GramPath::ExpLinear {
                        g0: square(g0)?,
                        h: square(h)?,
                    },
                    GramPathJson::Polynomial { coeffs } => {
                        if coeffs.is_empty() {
                            return Err(Error::Data("polynomial Gram path needs coefficients".into()));
                        }
                        GramPath::Polynomial(coeffs.iter().map(|c| square(c)).collect::<Result<_>>()?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let fam = MetricFamily::new(paths);
        Ok(if self.normalize { supervolume_normalize(&fam) } else { fam })
    }

    pub fn from_family(family: &MetricFamily) -> Result<Self> {
        let degrees = family
            .paths
            .iter()
            .map(|p| {
                Ok(match p {
                    GramPath::Constant(g) => GramPathJson::Constant { gram: matrix_to_rows(g) },
                    GramPath::ExpLinear { g0, h } => GramPathJson::ExpLinear {
                        g0: matrix_to_rows(g0),
                        h: matrix_to_rows(h),
                    },
                    GramPath::Polynomial(c) => GramPathJson::Polynomial {
                        coeffs: c.iter().map(matrix_to_rows).collect(),
                    },
                    GramPath::Custom(_) => return Err(Error::Unsupported("custom Gram paths have no JSON form".into())),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricFamilyJson {
            degrees,
            normalize: family.normalized_degree.is_some(),
        })
    }
}

fn square(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let m = matrix_from_rows(rows, Some(rows.len()))?;
    Ok(m)
}

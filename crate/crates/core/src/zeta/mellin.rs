use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real, C64};
use crate::quadrature::integrate_adaptive;
use crate::special::rgamma;

use super::spectrum::{degree_coefficient, SpectrumByDegree};

/// Shape of the transition from 1 to 0 in a cutoff.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `f(x)/(f(x)+f(1-x))` with `f(x) = e^{-1/x}`, smooth of all orders.
    #[default]
    SmoothExp,
    /// `10x³ - 15x⁴ + 6x⁵`, twice differentiable.
    Quintic,
}

impl CutoffProfile {
    /// Rises from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
    pub fn step(self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            CutoffProfile::SmoothExp => {
                let f = |y: f64| (-1.0 / y).exp();
                let (a, b) = (f(x), f(1.0 - x));
                a / (a + b)
            }
            CutoffProfile::Quintic => x * x * x * (10.0 + x * (-15.0 + 6.0 * x)),
        }
    }
}

/// `χ_N(t)`: 1 on `[1/N, N]`, 0 outside `[1/(2N), 2N]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSequence {
    pub profile: CutoffProfile,
}

impl CutoffSequence {
    pub fn new(profile: CutoffProfile) -> Self {
        CutoffSequence { profile }
    }

    pub fn value(&self, n: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t < 1.0 / n {
            self.profile.step(2.0 * n * t - 1.0)
        } else if t > n {
            self.profile.step((2.0 * n - t) / n)
        } else {
            1.0
        }
    }
}

/// F(λ, s) = Σ_k (-1)^{k+1} k ζ_k(s, λ) from the spectrum.
pub fn f_closed_form(spec: &SpectrumByDegree, lambda: C64, s: C64) -> Result<C64> {
    let mut total = real(0.0);
    for (k, d) in spec.degrees.iter().enumerate().skip(1) {
        total += d.zeta(s, lambda)? * degree_coefficient(k);
    }
    Ok(total)
}

/// Outcome of the cutoff-Mellin evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MellinValue {
    pub value: C64,
    /// Cutoff parameter at which successive values agreed.
    pub cutoff: f64,
    /// |F_N - F_{N/2}| at that cutoff.
    pub last_change: f64,
}

/// Settings for the cutoff-Mellin evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MellinSettings {
    pub profile: CutoffProfile,
    pub start: f64,
    pub max_cutoff: f64,
    pub tol: f64,
}

impl Default for MellinSettings {
    fn default() -> Self {
        MellinSettings { profile: CutoffProfile::SmoothExp, start: 64.0, max_cutoff: 65536.0, tol: 1e-11 }
    }
}

/// One cutoff value `(1/Γ(s)) ∫ str e^{-tD} t^{s-1} e^{-λt} χ_N(t) dt`,
/// integrated in `u = ln t`.
pub fn f_cutoff(spec: &SpectrumByDegree, lambda: C64, s: C64, n: f64, profile: CutoffProfile) -> Result<C64> {
    let chi = CutoffSequence::new(profile);
    let failure = std::cell::RefCell::new(None);
    let integrand = |u: f64| -> C64 {
        let t = u.exp();
        match spec.heat_supertrace(t) {
            Ok((h, _)) => h * (s * u - lambda * t).exp() * chi.value(n, t),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                real(0.0)
            }
        }
    };
    let lo = (0.5 / n).ln();
    let breaks = [lo, (1.0 / n).ln(), 0.0, n.ln(), (2.0 * n).ln()];
    let r = integrate_adaptive(integrand, &breaks, 1e-15, 1e-13, 4000);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.value * rgamma(s))
}

/// Cutoff-Mellin F(λ, s), doubling `N` until two successive values agree.
pub fn f_mellin(spec: &SpectrumByDegree, lambda: C64, s: C64, settings: &MellinSettings) -> Result<MellinValue> {
    let mut n = settings.start;
    let mut previous = f_cutoff(spec, lambda, s, n, settings.profile)?;
    loop {
        n *= 2.0;
        let next = f_cutoff(spec, lambda, s, n, settings.profile)?;
        let change = (next - previous).norm();
        if change <= settings.tol * next.norm().max(1.0) {
            return Ok(MellinValue { value: next, cutoff: n, last_change: change });
        }
        if n >= settings.max_cutoff {
            return Err(Error::Convergence {
                n: n as u64,
                previous: format!("{previous}"),
                last: format!("{next} (change {change:.3e})"),
            });
        }
        previous = next;
    }
}

/// log sdet = -∂_s F(0, s) at s = 0, through the continued zeta functions.
pub fn log_sdet_via_zeta(spec: &SpectrumByDegree) -> Result<C64> {
    spec.check_regular()?;
    let mut total = real(0.0);
    for (k, d) in spec.degrees.iter().enumerate().skip(1) {
        total += d.log_det()? * degree_coefficient(k);
    }
    Ok(total)
}

/// The same derivative numerically: complex step `-Im F(ih)/h` with
/// `h = 1e-20` when F is real on the real axis, else a central difference.
pub fn log_sdet_numeric(spec: &SpectrumByDegree) -> Result<C64> {
    spec.check_regular()?;
    let real_spectrum = spec.degrees.iter().all(|d| d.eigs.iter().all(|(z, _)| z.im == 0.0));
    if real_spectrum {
        let h = 1e-20;
        let f = f_closed_form(spec, real(0.0), C64::new(0.0, h))?;
        return Ok(real(-f.im / h));
    }
    let h = 1e-4;
    let plus = f_closed_form(spec, real(0.0), real(h))?;
    let minus = f_closed_form(spec, real(0.0), real(-h))?;
    let plus2 = f_closed_form(spec, real(0.0), real(2.0 * h))?;
    let minus2 = f_closed_form(spec, real(0.0), real(-2.0 * h))?;
    Ok(-(8.0 * (plus - minus) - (plus2 - minus2)) / (12.0 * h))
}

/// Analytic torsion `2|sin(θ/2)|` of the circle with holonomy `e^{iθ}`,
/// computed from the twisted Laplacian spectrum.
pub fn circle_torsion(theta: f64, radius: f64) -> Result<f64> {
    let spec = SpectrumByDegree::twisted_circle(theta, radius)?;
    Ok((0.5 * log_sdet_via_zeta(&spec)?.re).exp())
}

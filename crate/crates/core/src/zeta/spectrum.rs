use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, real, C64};
use crate::special::{hurwitz_zeta, hurwitz_zeta_derivative_at_zero};

/// Infinite tail attached to one degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum Tail {
    /// Eigenvalues `scale · (n + a)^power` for `n ≥ 0` and each offset `a`.
    Hurwitz { scale: f64, power: f64, offsets: Vec<f64> },
    /// Eigenvalues only known to satisfy `λ_j ≥ c · j^delta` for `j > start`.
    /// Supports heat-trace bounds, not zeta values.
    PowerLawBound { c: f64, delta: f64, start: u64 },
}

impl Tail {
    fn validate(&self) -> Result<()> {
        match self {
            Tail::Hurwitz { scale, power, offsets } => {
                if *scale <= 0.0 || *power <= 0.0 || offsets.iter().any(|&a| a <= 0.0) {
                    return Err(Error::Domain(format!(
                        "Hurwitz tail needs positive scale, power and offsets, got {scale}, {power}, {offsets:?}"
                    )));
                }
            }
            Tail::PowerLawBound { c, delta, .. } => {
                if *c <= 0.0 || *delta <= 0.0 {
                    return Err(Error::Domain(format!("power-law tail needs c, delta > 0, got {c}, {delta}")));
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues of one degree with multiplicities and an optional tail.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSpectrum {
    pub eigs: Vec<(C64, u64)>,
    pub tail: Option<Tail>,
}

impl DegreeSpectrum {
    pub fn new(mut eigs: Vec<(C64, u64)>, tail: Option<Tail>) -> Result<Self> {
        if let Some((z, _)) = eigs.iter().find(|(z, _)| z.re <= 0.0) {
            return Err(Error::Domain(format!("eigenvalue {z} does not have positive real part")));
        }
        if eigs.iter().any(|&(_, m)| m == 0) {
            return Err(Error::Domain("multiplicities must be at least 1".into()));
        }
        if let Some(t) = &tail {
            t.validate()?;
        }
        eigs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        Ok(DegreeSpectrum { eigs, tail })
    }

    pub fn finite(eigs: Vec<(C64, u64)>) -> Result<Self> {
        Self::new(eigs, None)
    }

    pub fn empty() -> Self {
        DegreeSpectrum { eigs: Vec::new(), tail: None }
    }

    /// Σ mult · e^{-tλ} and a bound on the neglected part.
    pub fn heat_trace(&self, t: f64) -> Result<(C64, f64)> {
        if t <= 0.0 {
            return Err(Error::Domain(format!("heat time must be positive, got {t}")));
        }
        let mut value: C64 = self.eigs.iter().map(|&(z, m)| (-t * z).exp() * m as f64).sum();
        let mut bound = 0.0;
        match &self.tail {
            None => {}
            Some(Tail::Hurwitz { scale, power, offsets }) => {
                for &a in offsets {
                    let (v, b) = hurwitz_heat_sum(t * scale, *power, a);
                    value += v;
                    bound += b;
                }
            }
            Some(Tail::PowerLawBound { c, delta, start }) => {
                let j = (*start + 1) as f64;
                let first = (-t * c * j.powf(*delta)).exp();
                bound = if *delta >= 1.0 {
                    let q = (-t * c * delta * j.powf(delta - 1.0)).exp();
                    first / (1.0 - q)
                } else {
                    f64::INFINITY
                };
            }
        }
        Ok((value, bound))
    }

    /// ζ(s, λ) = Σ mult · (λ_j + λ)^{-s}, continued through Hurwitz tails.
    pub fn zeta(&self, s: C64, shift: C64) -> Result<C64> {
        let mut total = real(0.0);
        for &(z, m) in &self.eigs {
            let w = z + shift;
            if w.re <= 0.0 {
                return Err(Error::Domain(format!("shifted eigenvalue {w} does not have positive real part")));
            }
            total += (-s * w.ln()).exp() * m as f64;
        }
        match &self.tail {
            None => {}
            Some(Tail::Hurwitz { scale, power, offsets }) => {
                for &a in offsets {
                    total += shifted_hurwitz(s, shift, *scale, *power, a)?;
                }
            }
            Some(Tail::PowerLawBound { .. }) => {
                return Err(Error::UnsupportedTail(
                    "power-law bounds carry no eigenvalues to continue".into(),
                ))
            }
        }
        Ok(total)
    }

    /// -∂_s ζ(s, 0) at s = 0.
    pub fn log_det(&self) -> Result<C64> {
        let mut total: C64 = self.eigs.iter().map(|&(z, m)| z.ln() * m as f64).sum();
        match &self.tail {
            None => {}
            Some(Tail::Hurwitz { scale, power, offsets }) => {
                for &a in offsets {
                    // ζ_tail(s) = scale^{-s} ζ_H(power·s, a)
                    let z0 = 0.5 - a;
                    total += real(scale.ln() * z0 - power * hurwitz_zeta_derivative_at_zero(a));
                }
            }
            Some(Tail::PowerLawBound { .. }) => {
                return Err(Error::UnsupportedTail(
                    "power-law bounds carry no eigenvalues to continue".into(),
                ))
            }
        }
        Ok(total)
    }

    fn has_zero(&self) -> bool {
        self.eigs.iter().any(|(z, _)| z.norm() == 0.0)
    }
}

/// Σ_{n≥0} e^{-τ (n+a)^p} summed until the terms are negligible.
fn hurwitz_heat_sum(tau: f64, p: f64, a: f64) -> (C64, f64) {
    let mut sum = 0.0;
    let mut n = 0u64;
    loop {
        let x = n as f64 + a;
        let term = (-tau * x.powf(p)).exp();
        sum += term;
        n += 1;
        // terms decrease; stop once the next one is far below rounding
        if term < 1e-18 * sum.max(1e-300) || n > 50_000_000 {
            let x = n as f64 + a;
            let ratio = (-tau * p * x.powf(p - 1.0)).exp();
            let next = (-tau * x.powf(p)).exp();
            let bound = if p >= 1.0 && ratio < 1.0 { next / (1.0 - ratio) } else { f64::INFINITY };
            return (real(sum), bound);
        }
    }
}

fn binomial_neg(s: C64, j: usize) -> C64 {
    // binom(-s, j) = (-s)(-s-1)…(-s-j+1)/j!
    let mut b = real(1.0);
    for i in 0..j {
        b *= (-s - i as f64) / (i as f64 + 1.0);
    }
    b
}

/// Σ_{n≥0} (scale (n+a)^p + λ)^{-s}: the first `K` terms directly, the rest by
/// the binomial series in λ / (scale (n+a)^p) over Hurwitz zeta values.
fn shifted_hurwitz(s: C64, shift: C64, scale: f64, p: f64, a: f64) -> Result<C64> {
    let base = real(scale * a.powf(p)) + shift;
    if base.re <= 0.0 {
        return Err(Error::Domain(format!("shifted tail eigenvalue {base} does not have positive real part")));
    }
    if shift.norm() == 0.0 {
        return Ok((-s * scale.ln()).exp() * hurwitz_zeta(s * p, a)?);
    }
    // direct terms until |λ| / (scale (n+a)^p) ≤ 1/4
    let mut k = 0usize;
    while scale * (k as f64 + a).powf(p) < 4.0 * shift.norm() {
        k += 1;
    }
    let mut total = real(0.0);
    for n in 0..k {
        let w = real(scale * (n as f64 + a).powf(p)) + shift;
        total += (-s * w.ln()).exp();
    }
    let a_k = a + k as f64;
    let ratio = shift / scale;
    let scale_pow = (-s * scale.ln()).exp();
    let mut j = 0usize;
    loop {
        let coeff = binomial_neg(s, j) * ratio.powu(j as u32);
        let term = coeff * hurwitz_zeta((s + j as f64) * p, a_k)? * scale_pow;
        total += term;
        j += 1;
        // the j-th term is bounded by |coeff| · a_k^{-p(Re s + j)} · (1 + tail)
        if term.norm() < 1e-17 * total.norm().max(1e-300) && j > 2 || j > 200 {
            break;
        }
    }
    Ok(total)
}

/// Per-degree spectra of a graded operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumByDegree {
    pub degrees: Vec<DegreeSpectrum>,
}

impl SpectrumByDegree {
    pub fn new(degrees: Vec<DegreeSpectrum>) -> Self {
        SpectrumByDegree { degrees }
    }

    /// Finite spectrum with unit multiplicities per degree.
    pub fn finite(per_degree: &[&[f64]]) -> Result<Self> {
        Ok(SpectrumByDegree {
            degrees: per_degree
                .iter()
                .map(|eigs| DegreeSpectrum::finite(eigs.iter().map(|&e| (real(e), 1)).collect()))
                .collect::<Result<_>>()?,
        })
    }

    /// Spectrum of `-d²/dx²` on a circle of radius `r` twisted by holonomy
    /// `θ`, i.e. `((n + θ/2π)/r)²` for `n ∈ Z`, in degrees 0 and 1.
    pub fn twisted_circle(theta: f64, radius: f64) -> Result<Self> {
        let a = (theta / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
        if a < 1e-14 || a > 1.0 - 1e-14 {
            return Err(Error::NotAcyclic(format!(
                "holonomy angle {theta} is a multiple of 2π, the twisted circle is not acyclic"
            )));
        }
        if radius <= 0.0 {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        let tail = Tail::Hurwitz {
            scale: radius.powi(-2),
            power: 2.0,
            offsets: vec![a, 1.0 - a],
        };
        let deg = DegreeSpectrum::new(Vec::new(), Some(tail))?;
        Ok(SpectrumByDegree::new(vec![deg.clone(), deg]))
    }

    /// Σ_k (-1)^{k+1} k tr e^{-tD^(k)} with the summed tail bound.
    pub fn heat_supertrace(&self, t: f64) -> Result<(C64, f64)> {
        let mut total = real(0.0);
        let mut bound = 0.0;
        for (k, d) in self.degrees.iter().enumerate().skip(1) {
            let (v, b) = d.heat_trace(t)?;
            total += v * degree_coefficient(k);
            bound += b * k as f64;
        }
        Ok((total, bound))
    }

    /// Per-degree heat traces.
    pub fn heat_trace(&self, t: f64) -> Result<Vec<(C64, f64)>> {
        self.degrees.iter().map(|d| d.heat_trace(t)).collect()
    }

    pub fn has_tails(&self) -> bool {
        self.degrees.iter().any(|d| d.tail.is_some())
    }

    pub(crate) fn check_regular(&self) -> Result<()> {
        if let Some(k) = self.degrees.iter().position(DegreeSpectrum::has_zero) {
            return Err(Error::Singularity(format!("zero eigenvalue in degree {k}")));
        }
        Ok(())
    }
}

/// The degree weight (-1)^{k+1} k.
pub fn degree_coefficient(k: usize) -> f64 {
    if k % 2 == 0 {
        -(k as f64)
    } else {
        k as f64
    }
}

/// JSON form of one degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeJson {
    #[serde(default)]
    pub eigs: Vec<[f64; 2]>,
    #[serde(default)]
    pub mults: Vec<u64>,
    #[serde(default)]
    pub tail: Option<Tail>,
}

/// JSON form `{degrees: [{eigs, mults, tail}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub degrees: Vec<DegreeJson>,
}

impl SpectrumJson {
    pub fn to_spectrum(&self) -> Result<SpectrumByDegree> {
        let degrees = self
            .degrees
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let mults = if d.mults.is_empty() { vec![1; d.eigs.len()] } else { d.mults.clone() };
                if mults.len() != d.eigs.len() {
                    return Err(Error::Dimension {
                        degree: k,
                        detail: format!("{} eigenvalues but {} multiplicities", d.eigs.len(), mults.len()),
                    });
                }
                DegreeSpectrum::new(
                    d.eigs.iter().zip(mults).map(|(e, m)| (c(e[0], e[1]), m)).collect(),
                    d.tail.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumByDegree::new(degrees))
    }

    pub fn from_spectrum(spec: &SpectrumByDegree) -> Self {
        SpectrumJson {
            degrees: spec
                .degrees
                .iter()
                .map(|d| DegreeJson {
                    eigs: d.eigs.iter().map(|(z, _)| [z.re, z.im]).collect(),
                    mults: d.eigs.iter().map(|&(_, m)| m).collect(),
                    tail: d.tail.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_eigenvalue_heat_and_zeta() {
        let d = DegreeSpectrum::finite(vec![(real(6.0), 1)]).unwrap();
        assert!((d.heat_trace(1.0).unwrap().0.re - 0.002_478_752_176_666_358_4).abs() < 1e-17);
        let d4 = DegreeSpectrum::finite(vec![(real(4.0), 1)]).unwrap();
        assert!((d4.zeta(real(2.0), real(0.0)).unwrap() - 1.0 / 16.0).norm() < 1e-16);
        assert!(d.heat_trace(0.0).is_err());
    }

    #[test]
    fn invalid_spectra_are_rejected() {
        assert!(DegreeSpectrum::finite(vec![(real(-1.0), 1)]).is_err());
        assert!(DegreeSpectrum::finite(vec![(real(1.0), 0)]).is_err());
        assert!(SpectrumByDegree::twisted_circle(2.0 * PI, 1.0).is_err());
    }

    #[test]
    fn power_law_tail_refuses_zeta() {
        let d = DegreeSpectrum::new(vec![(real(1.0), 1)], Some(Tail::PowerLawBound { c: 1.0, delta: 2.0, start: 10 })).unwrap();
        assert!(matches!(d.zeta(real(2.0), real(0.0)), Err(Error::UnsupportedTail(_))));
        let (_, bound) = d.heat_trace(0.1).unwrap();
        assert!(bound.is_finite() && bound > 0.0);
    }

    #[test]
    fn free_circle_heat_trace() {
        // n² over n ∈ Z: 1 + 2 Σ_{n≥1} e^{-tn²}
        let tail = Tail::Hurwitz { scale: 1.0, power: 2.0, offsets: vec![1.0, 1.0] };
        let d = DegreeSpectrum::new(vec![(real(1e-300), 1)], Some(tail)).unwrap();
        let (v, _) = d.heat_trace(0.01).unwrap();
        assert!((v.re - (PI / 0.01).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let spec = SpectrumByDegree::twisted_circle(PI, 2.0).unwrap();
        let j = SpectrumJson::from_spectrum(&spec);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"type\":\"hurwitz\""));
        let back: SpectrumJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_spectrum().unwrap(), spec);
    }
}

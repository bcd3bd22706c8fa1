use crate::error::{Error, Result};

use super::kernel::{ApproximateHeatKernel, SpectralHeatOracle};

/// Least-squares fit of `log y = p log t + log C`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    pub samples: Vec<(f64, f64)>,
}

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerFit> {
    if samples.len() < 2 || samples.iter().any(|&(t, y)| t <= 0.0 || y <= 0.0) {
        return Err(Error::Domain("power fit needs at least two positive samples".into()));
    }
    let n = samples.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(t, y)| (t.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(PowerFit { exponent, constant: (my - exponent * mx).exp(), samples: samples.to_vec() })
}

/// `n` points from `a` to `b` evenly spaced in `log t`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` points `2πi/n` on the circle.
pub fn circle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect()
}

/// Fit of `sup_{x,y} |S_N(t,x,y)|` over `ts`. For each `x` the sup runs over
/// `y = x + 2√t s` with `s ∈ [-6, 6]` in steps of 1/4, which covers the
/// Gaussian profile at every scale.
pub fn remainder_scaling(kernel: &ApproximateHeatKernel, ts: &[f64], xs: &[f64]) -> Result<PowerFit> {
    let offsets: Vec<f64> = (-24..=24).map(|i| i as f64 / 4.0).collect();
    let samples: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| {
            let width = 2.0 * t.sqrt();
            let sup = xs
                .iter()
                .flat_map(|&x| offsets.iter().map(move |&s| (x, x + width * s)))
                .map(|(x, y)| kernel.s_n(t, x, y).norm())
                .fold(0.0, f64::max);
            (t, sup)
        })
        .collect();
    fit_power_law(&samples)
}

/// Fit of `sup_x |S_N(t,x,x)|` over `ts`.
pub fn diagonal_remainder_scaling(kernel: &ApproximateHeatKernel, ts: &[f64], xs: &[f64]) -> Result<PowerFit> {
    let samples: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| (t, xs.iter().map(|&x| kernel.s_n(t, x, x).norm()).fold(0.0, f64::max)))
        .collect();
    fit_power_law(&samples)
}

/// Diagonal accuracy of `K_N` against the spectral oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyFit {
    pub fit: PowerFit,
    /// Exponent of the bound `C t^p`.
    pub bound_exponent: f64,
    /// Smallest `C` with `err(t) ≤ C t^p` on the samples.
    pub bound_constant: f64,
    /// Largest oracle error estimate seen.
    pub oracle_error: f64,
}

pub fn parametrix_accuracy(kernel: &ApproximateHeatKernel, ts: &[f64], xs: &[f64]) -> Result<AccuracyFit> {
    let p = (kernel.depth() as f64 - 1.0) / 2.0;
    let mut samples = Vec::with_capacity(ts.len());
    let mut oracle_error: f64 = 0.0;
    for &t in ts {
        let oracle = SpectralHeatOracle::new(&kernel.potential, t, SpectralHeatOracle::default_modes(t))?;
        oracle_error = oracle_error.max(oracle.error_estimate);
        let err = xs
            .iter()
            .map(|&x| (kernel.k_n(t, x, x) - oracle.eval(x, x)).norm())
            .fold(0.0, f64::max);
        samples.push((t, err));
    }
    let bound_constant = samples.iter().map(|&(t, e)| e / t.powf(p)).fold(0.0, f64::max);
    let fit = fit_power_law(&samples)?;
    Ok(AccuracyFit { fit, bound_exponent: p, bound_constant, oracle_error })
}

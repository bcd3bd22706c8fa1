use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{real, C64};
use crate::quadrature::gauss_legendre;

use super::kernel::ApproximateHeatKernel;

/// Quadrature for the Volterra series: a uniform periodic grid in space and
/// nested Gauss–Legendre nodes on the time simplex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolterraSettings {
    pub grid: usize,
    pub nodes: usize,
    /// Allowed |fine - coarse| relative to the correction, where the coarse
    /// pass uses half the time nodes.
    pub refinement_tol: f64,
}

impl Default for VolterraSettings {
    fn default() -> Self {
        VolterraSettings { grid: 1024, nodes: 16, refinement_tol: 1e-3 }
    }
}

/// `K_N + Σ_{k=1}^{k_max} (-1)^k K_N * S_N^{*k}` at one point.
#[derive(Clone, Debug)]
pub struct VolterraValue {
    pub value: C64,
    pub base: C64,
    /// The signed terms `(-1)^k K_N * S_N^{*k}`.
    pub corrections: Vec<C64>,
}

pub const MAX_VOLTERRA_ORDER: usize = 3;

struct Convolver<'a> {
    kernel: &'a ApproximateHeatKernel,
    grid: Vec<f64>,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Convolver<'_> {
    /// S_N^{*j}(u, z_i, y) on the grid.
    fn power(&self, j: usize, u: f64, y: f64) -> Vec<C64> {
        if j == 1 {
            return self.grid.iter().map(|&z| self.kernel.s_n(u, z, y)).collect();
        }
        let mut out = vec![real(0.0); self.grid.len()];
        for (&node, &w) in self.nodes.iter().zip(&self.weights) {
            let s = 0.5 * u * (node + 1.0);
            let inner = self.power(j - 1, s, y);
            let scale = 0.5 * u * w * self.h;
            for (i, &z) in self.grid.iter().enumerate() {
                let acc: C64 = self
                    .grid
                    .iter()
                    .zip(&inner)
                    .map(|(&zl, &f)| self.kernel.s_n(u - s, z, zl) * f)
                    .sum();
                out[i] += acc * scale;
            }
        }
        out
    }

    /// (K_N * S_N^{*k})(t, x, y).
    fn term(&self, k: usize, t: f64, x: f64, y: f64) -> C64 {
        let mut total = real(0.0);
        for (&node, &w) in self.nodes.iter().zip(&self.weights) {
            let u = 0.5 * t * (node + 1.0);
            let inner = self.power(k, u, y);
            let acc: C64 = self
                .grid
                .iter()
                .zip(&inner)
                .map(|(&z, &f)| self.kernel.k_n(t - u, x, z) * f)
                .sum();
            total += acc * (0.5 * t * w * self.h);
        }
        total
    }
}

fn convolver(kernel: &ApproximateHeatKernel, grid: usize, nodes: usize) -> Convolver<'_> {
    let h = 2.0 * PI / grid as f64;
    let (nodes, weights) = gauss_legendre(nodes);
    Convolver {
        kernel,
        grid: (0..grid).map(|i| i as f64 * h).collect(),
        h,
        nodes,
        weights,
    }
}

/// Volterra series truncated at `k_max ≤ 3`. Each correction is recomputed
/// with half the time nodes and must agree to `refinement_tol`.
pub fn volterra_correct(
    kernel: &ApproximateHeatKernel,
    k_max: usize,
    t: f64,
    x: f64,
    y: f64,
    settings: &VolterraSettings,
) -> Result<VolterraValue> {
    if k_max > MAX_VOLTERRA_ORDER {
        return Err(Error::TermBudget(format!("Volterra order {k_max} exceeds {MAX_VOLTERRA_ORDER}")));
    }
    if t <= 0.0 {
        return Err(Error::Domain(format!("heat time must be positive, got {t}")));
    }
    let base = kernel.k_n(t, x, y);
    let fine = convolver(kernel, settings.grid, settings.nodes);
    let coarse = convolver(kernel, settings.grid, (settings.nodes / 2).max(2));
    let mut corrections = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let f = fine.term(k, t, x, y) * sign;
        let c = coarse.term(k, t, x, y) * sign;
        if (f - c).norm() > settings.refinement_tol * f.norm() + 1e-300 && f.norm() > 1e-14 * base.norm() {
            return Err(Error::Refinement {
                coarse: format!("{c}"),
                fine: format!("{f}"),
            });
        }
        corrections.push(f);
    }
    let value = corrections.iter().fold(base, |acc, &c| acc + c);
    Ok(VolterraValue { value, base, corrections })
}

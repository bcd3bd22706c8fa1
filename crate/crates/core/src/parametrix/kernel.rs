use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{c, real, C64};

use super::fourier::{q, qc_to_f64, Fourier, Potential, QC};
use super::symbol::{parametrix_symbols, LaurentSymbol, ParametrixSymbols};

const TWO_PI: f64 = 2.0 * PI;
// periodic images with (z + 2πj)²/4t above this are dropped
const IMAGE_CUTOFF: f64 = 745.0;

#[derive(Clone, Debug)]
struct NumericTerm {
    a: u32,
    b: i32,
    coeffs: Vec<(i32, C64)>,
    factorial_b: f64,
}

/// Kernel `(2π)^{-1} (2πi)^{-1} ∫∫ e^{i(x-y)ξ - tλ} s dλ dξ` of a symbol,
/// periodized over the circle. The λ-integral is the residue
/// `t^{b-1} e^{-t(ξ²+v)}/(b-1)!`, the ξ-integral a Hermite moment.
#[derive(Clone, Debug)]
pub struct SymbolKernel {
    terms: Vec<NumericTerm>,
    v: Fourier,
    max_a: u32,
}

impl SymbolKernel {
    pub fn new(symbol: &LaurentSymbol, v: &Potential) -> Result<Self> {
        let mut terms = Vec::with_capacity(symbol.len());
        for (a, b, coeff) in symbol.terms() {
            if b < 1 {
                return Err(Error::Domain(format!(
                    "term ξ^{a} d̃^{} has no residue; only negative powers of d̃ have kernels",
                    -b
                )));
            }
            terms.push(NumericTerm {
                a,
                b,
                coeffs: coeff.to_f64(),
                factorial_b: (1..b).map(|i| i as f64).product(),
            });
        }
        let max_a = terms.iter().map(|t| t.a).max().unwrap_or(0);
        Ok(SymbolKernel { terms, v: v.series().clone(), max_a })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ_j H_a(w_j) e^{-w_j²} over periodic images, for a = 0..=max_a.
    fn hermite_images(&self, t: f64, z: f64) -> Vec<f64> {
        let mut z0 = z.rem_euclid(TWO_PI);
        if z0 > PI {
            z0 -= TWO_PI;
        }
        let s = 2.0 * t.sqrt();
        let mut sums = vec![0.0; self.max_a as usize + 1];
        let reach = (IMAGE_CUTOFF * 4.0 * t).sqrt() / TWO_PI + 1.0;
        let jmax = reach.ceil() as i64;
        for j in -jmax..=jmax {
            let w = (z0 + TWO_PI * j as f64) / s;
            if w * w > IMAGE_CUTOFF {
                continue;
            }
            let g = (-w * w).exp();
            let (mut h_prev, mut h) = (1.0, 2.0 * w);
            sums[0] += g;
            if self.max_a >= 1 {
                sums[1] += h * g;
            }
            for n in 1..self.max_a as usize {
                let next = 2.0 * w * h - 2.0 * n as f64 * h_prev;
                h_prev = h;
                h = next;
                sums[n + 1] += h * g;
            }
        }
        sums
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> C64 {
        if self.terms.is_empty() {
            return real(0.0);
        }
        let images = self.hermite_images(t, x - y);
        let vx = self.v.eval(x).re;
        let base = (-t * vx).exp() * (PI / t).sqrt() / TWO_PI;
        let i_over = c(0.0, 0.5 / t.sqrt());
        let mut total = real(0.0);
        for term in &self.terms {
            let cx: C64 = term.coeffs.iter().map(|&(n, cn)| cn * C64::from_polar(1.0, n as f64 * x)).sum();
            let tb = t.powi(term.b - 1) / term.factorial_b;
            total += cx * tb * i_over.powu(term.a) * images[term.a as usize];
        }
        total * base
    }
}

/// `K_N` and `S_N = (∂_t + D) K_N` for `D = -∂²_x + v`.
#[derive(Clone, Debug)]
pub struct ApproximateHeatKernel {
    pub potential: Potential,
    pub symbols: ParametrixSymbols,
    k_n: SymbolKernel,
    s_n: SymbolKernel,
}

impl ApproximateHeatKernel {
    pub fn new(v: &Potential, depth: usize) -> Result<Self> {
        let symbols = parametrix_symbols(v, depth)?;
        let k_n = SymbolKernel::new(&symbols.total(), v)?;
        let s_n = SymbolKernel::new(&symbols.remainder, v)?;
        Ok(ApproximateHeatKernel { potential: v.clone(), symbols, k_n, s_n })
    }

    pub fn depth(&self) -> usize {
        self.symbols.depth
    }

    pub fn k_n(&self, t: f64, x: f64, y: f64) -> C64 {
        self.k_n.eval(t, x, y)
    }

    pub fn s_n(&self, t: f64, x: f64, y: f64) -> C64 {
        self.s_n.eval(t, x, y)
    }
}

/// Differential operator `θ = Σ_j θ_j(x) ∂_x^j` with trigonometric coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    pub coeffs: Vec<Fourier>,
}

impl DiffOperator {
    pub fn identity() -> Self {
        DiffOperator { coeffs: vec![Fourier::one()] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Symbol of `θ` composed with a symbol: `Σ_j θ_j (∂_x + iξ)^j s`.
    pub fn apply(&self, s: &LaurentSymbol, v: &Potential) -> (LaurentSymbol, f64) {
        let i = QC::new(BigRational::zero(), BigRational::one());
        let mut power = s.clone();
        let mut out = LaurentSymbol::zero();
        let mut tail = 0.0;
        for (j, coeff) in self.coeffs.iter().enumerate() {
            if j > 0 {
                let (d, t) = power.dx(v);
                tail += t;
                power = d.add(&power.shift(1, 0).scale(&i));
            }
            let (p, t) = power.mul_fourier(coeff);
            tail += t;
            out = out.add(&p);
        }
        (out, tail)
    }
}

/// Coefficient `B_k` in `∫ tr θK_N(t,x,x) dx = Σ_k t^{(k-l-1)/2} B_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatCoefficient {
    pub k: usize,
    /// `B_k / √π`, exact.
    pub over_sqrt_pi: QC,
    pub value: C64,
}

/// Heat coefficients `B_0..B_N` from the parametrix by residues and exact
/// Gaussian moments. `θ = None` means the identity.
pub fn heat_coefficients(v: &Potential, depth: usize, theta: Option<&DiffOperator>) -> Result<Vec<HeatCoefficient>> {
    let symbols = parametrix_symbols(v, depth)?;
    let ident = DiffOperator::identity();
    let theta = theta.unwrap_or(&ident);
    let l = theta.order() as i64;
    let (b_sym, _) = theta.apply(&symbols.total(), v);
    let mut acc = vec![QC::zero(); depth + 1];
    // powers v^j / j! as exact series
    let mut v_powers = vec![Fourier::one()];
    for (a, b, coeff) in b_sym.terms() {
        if a % 2 == 1 || b < 1 {
            continue;
        }
        let m = (a / 2) as i64;
        // i^a H_a(0) = (2m)!/m!
        let mut gauss = q(1, 1);
        for r in (m + 1)..=(2 * m) {
            gauss *= q(r, 1);
        }
        gauss /= q(4, 1).pow(m as i32);
        for r in 1..b as i64 {
            gauss /= q(r, 1);
        }
        // k = 2b - a - 2 + 2j + l
        let k0 = 2 * b as i64 - a as i64 - 2 + l;
        let mut j = 0i64;
        while k0 + 2 * j <= depth as i64 {
            if k0 + 2 * j >= 0 {
                while v_powers.len() <= j as usize {
                    let last = v_powers.last().cloned().unwrap_or_else(Fourier::one);
                    let (next, _) = last.mul(v.series());
                    let jj = v_powers.len() as i64;
                    v_powers.push(next.scale(&QC::new(q(1, jj), BigRational::zero())));
                }
                let (prod, _) = coeff.mul(&v_powers[j as usize]);
                let sign = if j % 2 == 0 { q(1, 1) } else { q(-1, 1) };
                let factor = QC::new(gauss.clone() * sign, BigRational::zero());
                acc[(k0 + 2 * j) as usize] += prod.mean() * factor;
            }
            j += 1;
        }
    }
    let sqrt_pi = PI.sqrt();
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(k, over)| HeatCoefficient { k, value: qc_to_f64(&over) * sqrt_pi, over_sqrt_pi: over })
        .collect())
}

/// Reference heat kernel from a Fourier–Galerkin discretization of
/// `-∂² + v` on modes `|n| ≤ modes`.
#[derive(Clone, Debug)]
pub struct SpectralHeatOracle {
    pub t: f64,
    pub modes: usize,
    /// `U e^{-tΛ} U†` in the Fourier basis.
    matrix: crate::linalg::CMat,
    /// Size of the discarded part, `(2M+1) e^{-t λ_max} / 2π`.
    pub error_estimate: f64,
}

impl SpectralHeatOracle {
    pub fn default_modes(t: f64) -> usize {
        64usize.max((45.0 / t).sqrt().ceil() as usize + 16)
    }

    pub fn new(v: &Potential, t: f64, modes: usize) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::Domain(format!("heat time must be positive, got {t}")));
        }
        if modes < 64 {
            return Err(Error::Domain(format!("at least 64 modes are needed, got {modes}")));
        }
        let size = 2 * modes + 1;
        let coeffs = v.series().to_f64();
        let m = modes as i64;
        let h = crate::linalg::CMat::from_fn(size, size, |i, j| {
            let (ni, nj) = (i as i64 - m, j as i64 - m);
            let mut entry = coeffs
                .iter()
                .find(|(k, _)| *k as i64 == ni - nj)
                .map_or(real(0.0), |&(_, cn)| cn);
            if i == j {
                entry += (ni * ni) as f64;
            }
            entry
        });
        let eig = nalgebra::SymmetricEigen::new(h);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = crate::linalg::CMat::from_diagonal(&eig.eigenvalues.map(|l| real((-t * l).exp())));
        let matrix = &eig.eigenvectors * weights * eig.eigenvectors.adjoint();
        let error_estimate = size as f64 * (-t * lambda_max).exp() / TWO_PI;
        Ok(SpectralHeatOracle { t, modes, matrix, error_estimate })
    }

    /// `∫ K(t,x,x) dx = Σ_j e^{-tλ_j}`.
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `K(t,x,y) = (2π)^{-1} Σ_{m,n} e^{imx} [U e^{-tΛ} U†]_{mn} e^{-iny}`.
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let m = self.modes as i64;
        let size = self.matrix.nrows();
        let ex: Vec<C64> = (0..size).map(|i| C64::from_polar(1.0, (i as i64 - m) as f64 * x)).collect();
        let ey: Vec<C64> = (0..size).map(|j| C64::from_polar(1.0, -((j as i64 - m) as f64) * y)).collect();
        let mut total = real(0.0);
        for j in 0..size {
            let col: C64 = (0..size).map(|i| ex[i] * self.matrix[(i, j)]).sum();
            total += col * ey[j];
        }
        total / TWO_PI
    }
}

/// Evaluate `-∂²_x f + v f` by a fourth-order central difference, for
/// checking `S_N = (∂_t + D) K_N`.
pub fn apply_d_numeric(f: impl Fn(f64) -> C64, v: &Potential, x: f64, h: f64) -> C64 {
    let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
    -d2 + v.eval(x) * f(x)
}

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, real, C64};
use crate::special::rgamma;

use super::catalog::{CatMap, ClosedOrbit, OrbitCatalog, PoincareData, Subshift};

/// A truncated orbit sum and a bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncated {
    pub value: C64,
    pub tail_bound: f64,
}

/// Euler product over primitive orbits together with both of its logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedZeta {
    pub value: C64,
    /// `Σ_{γ primitive} log(1 - ρ(γ) e^{-λT_γ})`.
    pub log_product: C64,
    /// `-Σ_{γ} (T#_γ/T_γ) ρ(γ) e^{-λT_γ}` over all orbits.
    pub log_sum: C64,
    pub tail_bound: f64,
}

fn poincare(o: &ClosedOrbit) -> Result<&PoincareData> {
    o.poincare
        .as_ref()
        .ok_or_else(|| Error::Unsupported("catalog carries no Poincaré data".into()))
}

/// `log(1 + w)` without cancellation for small `w`.
fn ln_1p(w: C64) -> C64 {
    c(0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p(), w.im.atan2(1.0 + w.re))
}

fn mult(o: &ClosedOrbit) -> f64 {
    o.multiplicity as f64
}

/// Atoms `(T_γ, T#_γ tr(∧^k P_γ) tr ρ(γ) / |det(I - P_γ)|)` of the flat trace
/// on `k`-forms, one per orbit class, multiplicity included.
pub fn guillemin_comb(catalog: &OrbitCatalog, k: usize) -> Result<Vec<(f64, C64)>> {
    catalog
        .orbits
        .iter()
        .map(|o| {
            let p = poincare(o)?;
            let w = o.primitive_period * p.wedge_trace(k) as f64 / p.abs_det() as f64;
            Ok((o.period, o.holonomy * w * mult(o)))
        })
        .collect()
}

/// `-Σ_γ (T#/T) Σ_k (-1)^k tr(∧^k P) tr ρ / |det(I-P)| e^{-λT}`.
pub fn orbit_log_sdet(catalog: &OrbitCatalog, lambda: C64) -> Result<Truncated> {
    catalog.check_abscissa(lambda)?;
    let mut sum = real(0.0);
    for o in &catalog.orbits {
        let p = poincare(o)?;
        let collapse = p.alternating_wedge_sum() as f64 / p.abs_det() as f64;
        sum += o.holonomy * (-lambda * o.period).exp() * (mult(o) * o.primitive_period / o.period * collapse);
    }
    Ok(Truncated { value: -sum, tail_bound: catalog.tail_bound(lambda) })
}

/// `Π_{γ primitive} (1 - ρ(γ) e^{-λT_γ})` over the catalog.
pub fn ruelle_zeta_truncated(catalog: &OrbitCatalog, lambda: C64) -> Result<TruncatedZeta> {
    catalog.check_abscissa(lambda)?;
    let mut log_product = real(0.0);
    let mut log_sum = real(0.0);
    for o in &catalog.orbits {
        let x = o.holonomy * (-lambda * o.period).exp();
        if o.is_primitive() {
            log_product += ln_1p(-x) * mult(o);
        }
        log_sum -= x * (mult(o) * o.primitive_period / o.period);
    }
    Ok(TruncatedZeta {
        value: log_product.exp(),
        log_product,
        log_sum,
        tail_bound: catalog.tail_bound(lambda),
    })
}

/// `ζ(λ) = (1 - μw)(1 - μ^{-1}w) / (1 - w)²` with `w = sgn(tr A) e^{iα-λ}`,
/// the continuation of the cat-map Euler product to all `λ`.
pub fn zeta_closed_form_cat(a: &CatMap, alpha: f64, lambda: C64) -> Result<C64> {
    let mu = a.mu();
    let w = (c(0.0, alpha) - lambda).exp() * (a.trace().signum() as f64);
    if (1.0 - w).norm() < 1e-12 {
        return Err(Error::Singularity(format!(
            "e^(iα-λ) = {w} is a double pole at α = {alpha}, λ = {lambda}"
        )));
    }
    Ok((1.0 - w * mu) * (1.0 - w / mu) / ((1.0 - w) * (1.0 - w)))
}

/// Which side of `M` the roof weights multiply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RoofConvention {
    /// `T_ij = M_ij e^{-λ r_j}`.
    #[default]
    Column,
    /// `T_ij = e^{-λ r_i} M_ij`.
    Row,
}

pub fn transfer_matrix(s: &Subshift, lambda: C64, convention: RoofConvention) -> linalg::CMat {
    let k = s.states();
    linalg::CMat::from_fn(k, k, |i, j| {
        let r = match convention {
            RoofConvention::Column => s.roof[j],
            RoofConvention::Row => s.roof[i],
        };
        real(s.matrix[i][j] as f64) * (-lambda * r).exp()
    })
}

/// `det(I - e^{iα} T(λ))`, the continuation of the subshift Euler product.
pub fn zeta_transfer_determinant(s: &Subshift, alpha: f64, lambda: C64) -> C64 {
    zeta_transfer_determinant_with(s, alpha, lambda, RoofConvention::Column)
}

pub fn zeta_transfer_determinant_with(s: &Subshift, alpha: f64, lambda: C64, convention: RoofConvention) -> C64 {
    let k = s.states();
    let t = transfer_matrix(s, lambda, convention) * C64::from_polar(1.0, alpha);
    linalg::det(&(linalg::identity(k) - t))
}

/// `F^{(k)}(λ, s) = Γ(s)^{-1} Σ_γ T# tr(∧^k P) tr ρ / |det(I-P)| T^{s-1} e^{-λT}`.
pub fn f_k_dirichlet(catalog: &OrbitCatalog, k: usize, lambda: C64, s: C64) -> Result<C64> {
    catalog.check_abscissa(lambda)?;
    let mut sum = real(0.0);
    for (t, w) in guillemin_comb(catalog, k)? {
        sum += w * (real(t).ln() * (s - 1.0) - lambda * t).exp();
    }
    Ok(sum * rgamma(s))
}

/// `∂_s F^{(k)}(λ, 0)` from the Cauchy integral over `|s| = 1/2`.
pub fn f_k_s_derivative(catalog: &OrbitCatalog, k: usize, lambda: C64) -> Result<C64> {
    const RADIUS: f64 = 0.5;
    const POINTS: usize = 64;
    let mut sum = real(0.0);
    for j in 0..POINTS {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / POINTS as f64);
        sum += f_k_dirichlet(catalog, k, lambda, e * RADIUS)? / e;
    }
    Ok(sum / (RADIUS * POINTS as f64))
}

/// `sdet((L_X + λ)|_{im ι_X}) · ζ(λ)^{-(-1)^m}`, which is 1 when the
/// stable bundle is orientable.
pub fn sdet_zeta_ratio(catalog: &OrbitCatalog, lambda: C64) -> Result<C64> {
    let log_sdet = orbit_log_sdet(catalog, lambda)?.value;
    let zeta = ruelle_zeta_truncated(catalog, lambda)?;
    let sign = if catalog.m % 2 == 0 { 1.0 } else { -1.0 };
    Ok((log_sdet - zeta.log_product * sign).exp())
}

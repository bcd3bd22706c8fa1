use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::quadrature::gauss_legendre_on;

use super::map::GradedMap;

/// Default number of Gauss–Legendre nodes.
pub const DUHAMEL_DEFAULT_ORDER: usize = 32;
/// Step for central differences when no analytic derivative is supplied.
pub const DUHAMEL_FD_STEP: f64 = 1e-5;

/// A τ-family of shift-0 operators with an optional analytic derivative.
pub struct OperatorFamily<'a> {
    pub value: Box<dyn Fn(f64) -> Result<GradedMap> + 'a>,
    pub derivative: Option<Box<dyn Fn(f64) -> Result<GradedMap> + 'a>>,
}

impl<'a> OperatorFamily<'a> {
    pub fn new(value: impl Fn(f64) -> Result<GradedMap> + 'a) -> Self {
        OperatorFamily {
            value: Box::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> Result<GradedMap> + 'a) -> Self {
        self.derivative = Some(Box::new(derivative));
        self
    }

    pub fn at(&self, tau: f64) -> Result<GradedMap> {
        (self.value)(tau)
    }

    /// Ḋ_τ, analytic when available, else a central difference.
    pub fn derivative_at(&self, tau: f64) -> Result<GradedMap> {
        match &self.derivative {
            Some(f) => f(tau),
            None => {
                let h = DUHAMEL_FD_STEP;
                let plus = self.at(tau + h)?;
                let minus = self.at(tau - h)?;
                Ok(plus.sub(&minus)?.scale(real(0.5 / h)))
            }
        }
    }
}

/// `e^{-tD}` blockwise.
pub fn heat_semigroup(d_op: &GradedMap, t: f64) -> GradedMap {
    d_op.map_blocks(|_, b| linalg::expm(&(b * real(-t))))
}

/// `d/dτ e^{-tD_τ} = -∫_0^t e^{-(t-u)D_τ} Ḋ_τ e^{-uD_τ} du` by
/// Gauss–Legendre quadrature with `order` nodes.
pub fn duhamel_derivative(family: &OperatorFamily<'_>, tau: f64, t: f64, order: usize) -> Result<GradedMap> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("heat time must be positive, got {t}")));
    }
    let d_op = family.at(tau)?;
    let d_dot = family.derivative_at(tau)?;
    if d_op.shift() != 0 || d_dot.shift() != 0 || d_op.dims() != d_dot.dims() {
        return Err(Error::Dimension {
            degree: 0,
            detail: "family value and derivative must be shift-0 maps on the same space".into(),
        });
    }
    let (nodes, weights) = gauss_legendre_on(order, 0.0, t);
    let mut acc = GradedMap::zero(d_op.dims(), 0);
    for (u, w) in nodes.iter().zip(&weights) {
        let left = heat_semigroup(&d_op, t - u);
        let right = heat_semigroup(&d_op, *u);
        let term = left.compose(&d_dot)?.compose(&right)?;
        acc = acc.add(&term.scale(real(-w)))?;
    }
    Ok(acc)
}

/// Central difference `(e^{-tD_{τ+h}} - e^{-tD_{τ-h}}) / 2h`.
pub fn heat_semigroup_central_difference(family: &OperatorFamily<'_>, tau: f64, t: f64, h: f64) -> Result<GradedMap> {
    let plus = heat_semigroup(&family.at(tau + h)?, t);
    let minus = heat_semigroup(&family.at(tau - h)?, t);
    Ok(plus.sub(&minus)?.scale(real(0.5 / h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_family() {
        let fam = OperatorFamily::new(|tau| Ok(GradedMap::identity(&[1, 1]).scale(real(1.0 + tau))));
        let der = duhamel_derivative(&fam, 0.0, 1.0, DUHAMEL_DEFAULT_ORDER).unwrap();
        for k in 0..2 {
            assert!((der.block(k)[(0, 0)] + (-1f64).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn analytic_derivative_is_used() {
        let fam = OperatorFamily::new(|tau| Ok(GradedMap::identity(&[2]).scale(real(tau))))
            .with_derivative(|_| Ok(GradedMap::identity(&[2]).scale(real(2.0))));
        // derivative deliberately inconsistent: -t·2·e^{0} at τ = 0
        let der = duhamel_derivative(&fam, 0.0, 0.5, 8).unwrap();
        assert!((der.block(0)[(0, 0)] + 1.0).norm() < 1e-14);
    }
}

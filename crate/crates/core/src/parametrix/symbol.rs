//! Symbols `Σ c(x) ξ^a d̃^{-b}` with `d̃ = ξ² + v(x) - λ`, graded by the
//! order `a - 2b` (λ has weight 2).

use std::collections::BTreeMap;

use nalgebra::Complex;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

use super::fourier::{q, qc_int, Fourier, Potential, QC};

/// Largest supported parametrix depth.
pub const MAX_DEPTH: usize = 8;

/// Finite sum of terms `c(x) ξ^a d̃^{-b}` keyed by `(a, b)`. `b ≤ 0` stands
/// for a polynomial in `d̃`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentSymbol {
    terms: BTreeMap<(u32, i32), Fourier>,
}

impl LaurentSymbol {
    pub fn zero() -> Self {
        LaurentSymbol::default()
    }

    pub fn term(a: u32, b: i32, c: Fourier) -> Self {
        let mut s = LaurentSymbol::zero();
        s.add_term(a, b, c);
        s
    }

    /// Multiply every coefficient by the Fourier series `f`; returns the
    /// dropped tail.
    pub fn mul_fourier(&self, f: &Fourier) -> (LaurentSymbol, f64) {
        let mut out = LaurentSymbol::zero();
        let mut tail = 0.0;
        for (&(a, b), c) in &self.terms {
            let (p, t) = c.mul(f);
            tail += t;
            out.add_term(a, b, p);
        }
        (out, tail)
    }

    /// `d̃^{-1}`.
    pub fn resolvent() -> Self {
        LaurentSymbol::term(0, 1, Fourier::one())
    }

    fn add_term(&mut self, a: u32, b: i32, c: Fourier) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_default();
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i32, &Fourier)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Orders `a - 2b` present, highest first.
    pub fn orders(&self) -> Vec<i32> {
        let mut o: Vec<i32> = self.terms.keys().map(|&(a, b)| a as i32 - 2 * b).collect();
        o.sort_unstable_by(|x, y| y.cmp(x));
        o.dedup();
        o
    }

    /// The order when every term has the same one.
    pub fn homogeneous_order(&self) -> Option<i32> {
        match self.orders().as_slice() {
            [o] => Some(*o),
            _ => None,
        }
    }

    pub fn part_of_order(&self, order: i32) -> LaurentSymbol {
        self.filter(|o| o == order)
    }

    pub fn filter(&self, keep: impl Fn(i32) -> bool) -> LaurentSymbol {
        LaurentSymbol {
            terms: self
                .terms
                .iter()
                .filter(|(&(a, b), _)| keep(a as i32 - 2 * b))
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &LaurentSymbol) -> LaurentSymbol {
        let mut out = self.clone();
        for (&(a, b), c) in &other.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &QC) -> LaurentSymbol {
        let mut out = LaurentSymbol::zero();
        for (&(a, b), f) in &self.terms {
            out.add_term(a, b, f.scale(c));
        }
        out
    }

    /// Multiply by `ξ^k d̃^{j}`.
    pub fn shift(&self, k: u32, j: i32) -> LaurentSymbol {
        LaurentSymbol {
            terms: self.terms.iter().map(|(&(a, b), c)| ((a + k, b - j), c.clone())).collect(),
        }
    }

    /// ∂_x, using `∂_x d̃^{-b} = -b v' d̃^{-b-1}`; returns the dropped tail.
    pub fn dx(&self, v: &Potential) -> (LaurentSymbol, f64) {
        let dv = v.series().derivative();
        let mut out = LaurentSymbol::zero();
        let mut tail = 0.0;
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, c.derivative());
            if b != 0 {
                let (p, t) = c.mul(&dv);
                tail += t;
                out.add_term(a, b + 1, p.scale(&qc_int(-(b as i64))));
            }
        }
        (out, tail)
    }

    /// `Σ_α (-i)^α/α! ∂_ξ^α d̃ ∂_x^α` for `d̃ = ξ² + v - λ`, split as the
    /// principal multiplication `d̃·s` and the rest `-2iξ ∂_x s - ∂_x² s`.
    pub fn apply_operator(&self, v: &Potential) -> (LaurentSymbol, LaurentSymbol, f64) {
        let principal = self.shift(0, 1);
        let (d1, t1) = self.dx(v);
        let (d2, t2) = d1.dx(v);
        let minus_two_i = Complex::new(BigRational::zero(), q(-2, 1));
        let rest = d1.shift(1, 0).scale(&minus_two_i).add(&d2.scale(&qc_int(-1)));
        (principal, rest, t1 + t2)
    }

    /// `true` when the symbol is exactly 1.
    pub fn is_identity(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)) == Some(&Fourier::one())
    }
}

/// Parametrix symbols `q_0..q_{N+1}` with the remainder `r^N`.
#[derive(Clone, Debug)]
pub struct ParametrixSymbols {
    pub depth: usize,
    pub q: Vec<LaurentSymbol>,
    /// Terms of order `≤ -2 - N` of `Σ_α … ∂_x^α q^N`.
    pub remainder: LaurentSymbol,
    /// ℓ¹ norm of Fourier coefficients dropped by truncation.
    pub truncation_tail: f64,
    /// Full left-hand side `Σ_α (-i)^α/α! ∂_ξ^α d̃ ∂_x^α q^N`.
    pub composed: LaurentSymbol,
}

impl ParametrixSymbols {
    /// `q^N = Σ_{M ≤ N+1} q_M`.
    pub fn total(&self) -> LaurentSymbol {
        self.q.iter().fold(LaurentSymbol::zero(), |acc, s| acc.add(s))
    }

    /// The composed symbol equals `1 + r^N`, and `q_M` is homogeneous of
    /// order `-2 - M` (or zero).
    pub fn identity_holds(&self) -> bool {
        let one = LaurentSymbol::term(0, 0, Fourier::one());
        let expected = one.add(&self.remainder);
        let homogeneous = self
            .q
            .iter()
            .enumerate()
            .all(|(m, s)| s.is_empty() || s.homogeneous_order() == Some(-2 - m as i32));
        let n = self.depth as i32;
        homogeneous && self.composed == expected && self.remainder.orders().iter().all(|&o| o <= -2 - n)
    }
}

/// Solve `Σ_α (-i)^α/α! ∂_ξ^α d̃ ∂_x^α q^N = 1 + r^N` order by order.
pub fn parametrix_symbols(v: &Potential, depth: usize) -> Result<ParametrixSymbols> {
    if depth > MAX_DEPTH {
        return Err(Error::TermBudget(format!("parametrix depth {depth} exceeds {MAX_DEPTH}")));
    }
    let mut q = vec![LaurentSymbol::resolvent()];
    let mut principal = LaurentSymbol::zero();
    let mut rest = LaurentSymbol::zero();
    let mut tail = 0.0;
    let (p0, r0, t0) = q[0].apply_operator(v);
    principal = principal.add(&p0);
    rest = rest.add(&r0);
    tail += t0;
    for m in 1..=depth + 1 {
        let order = -(m as i32);
        let qm = rest.part_of_order(order).shift(0, -1).scale(&qc_int(-1));
        let (p, r, t) = qm.apply_operator(v);
        principal = principal.add(&p);
        rest = rest.add(&r);
        tail += t;
        q.push(qm);
    }
    let composed = principal.add(&rest);
    let bound = -2 - depth as i32;
    let remainder = composed.filter(|o| o <= bound);
    Ok(ParametrixSymbols {
        depth,
        q,
        remainder,
        truncation_tail: tail,
        composed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametrix::fourier::qc;

    #[test]
    fn free_operator_has_trivial_parametrix() {
        let s = parametrix_symbols(&Potential::zero(), 4).unwrap();
        assert_eq!(s.q[0], LaurentSymbol::resolvent());
        assert!(s.q[1..].iter().all(LaurentSymbol::is_empty));
        assert!(s.remainder.is_empty());
        assert!(s.identity_holds());
    }

    #[test]
    fn constant_potential_has_trivial_parametrix() {
        let s = parametrix_symbols(&Potential::constant(q(3, 2)), 3).unwrap();
        assert!(s.q[1..].iter().all(LaurentSymbol::is_empty));
        assert!(s.remainder.is_empty());
    }

    #[test]
    fn sine_potential_first_corrections() {
        let v = Potential::parse("sin").unwrap();
        let s = parametrix_symbols(&v, 4).unwrap();
        assert!(s.identity_holds());
        assert!(s.q[1].is_empty() && s.q[2].is_empty());
        // q_3 = -2iξ v' d̃^{-3}
        let cos = Potential::parse("cos").unwrap().series().clone();
        let want = LaurentSymbol::term(1, 3, cos.scale(&qc(BigRational::zero(), q(-2, 1))));
        assert_eq!(s.q[3], want);
        assert_eq!(s.truncation_tail, 0.0);
    }

    #[test]
    fn depth_budget() {
        assert!(matches!(parametrix_symbols(&Potential::zero(), 9), Err(Error::TermBudget(_))));
    }
}

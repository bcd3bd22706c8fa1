use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, C64, RANK_TOL};

use super::checks::acyclicity_check;
use super::map::{sign, GradedMap};

/// Agreement required between the restricted and full-space determinant
/// formulas.
pub const SDET_CROSSCHECK_TOL: f64 = 1e-9;
/// Agreement required between the two supertrace formulas.
pub const SUPERTRACE_CROSSCHECK_TOL: f64 = 1e-10;
/// Allowed leakage of `D` out of `L`.
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Decomposition of each degree into `L = im(map)` and its orthogonal
/// complement `C`.
#[derive(Clone, Debug)]
pub struct Splitting {
    /// Orthonormal basis of `L^(k)`, as columns.
    pub basis_l: Vec<CMat>,
    /// Orthonormal basis of `C^(k)`, as columns.
    pub basis_c: Vec<CMat>,
    /// Condition number of the map restricted to `C^(k)`, per source degree
    /// (1 when the restriction is empty).
    pub condition: Vec<f64>,
}

impl Splitting {
    pub fn projector_l(&self, k: usize) -> CMat {
        &self.basis_l[k] * self.basis_l[k].adjoint()
    }

    pub fn projector_c(&self, k: usize) -> CMat {
        let n = self.basis_l[k].nrows();
        linalg::identity(n) - self.projector_l(k)
    }

    pub fn dim_l(&self, k: usize) -> usize {
        self.basis_l[k].ncols()
    }

    /// χ_L = Σ_k (-1)^k dim L^(k).
    pub fn euler_characteristic_l(&self) -> i64 {
        (0..self.basis_l.len())
            .map(|k| if k % 2 == 0 { self.dim_l(k) as i64 } else { -(self.dim_l(k) as i64) })
            .sum()
    }
}

/// Split each degree as `im(map) ⊕ im(map)^⊥` and check that `map`
/// restricted to the complement is a bijection onto the image.
pub fn split_complement(map: &GradedMap) -> Result<Splitting> {
    let report = acyclicity_check(map)?;
    if !report.acyclic {
        let bad = report
            .degrees
            .iter()
            .enumerate()
            .find(|(k, r)| r.rank_in + r.rank_out != map.dims()[*k])
            .map(|(k, _)| k)
            .unwrap_or(0);
        return Err(Error::NotAcyclic(format!("homology is nonzero in degree {bad}")));
    }
    let n = map.degrees();
    let scale = map.norm();
    let mut basis_l = Vec::with_capacity(n);
    let mut basis_c = Vec::with_capacity(n);
    for k in 0..n {
        let m = map.dims()[k];
        let l = match map.source_into(k) {
            Some(s) => linalg::column_basis(map.block(s), RANK_TOL, scale),
            None => linalg::zeros(m, 0),
        };
        basis_c.push(linalg::orthogonal_complement(&l, m));
        basis_l.push(l);
    }
    let mut condition = Vec::with_capacity(n);
    for k in 0..n {
        let cond = match map.target(k) {
            Some(t) if basis_c[k].ncols() > 0 => {
                let restricted = basis_l[t].adjoint() * map.block(k) * &basis_c[k];
                if !restricted.is_square() {
                    return Err(Error::NotAcyclic(format!("C^({k}) and L^({t}) have different dimensions")));
                }
                let sv = linalg::singular_values(&restricted);
                let (hi, lo) = (sv[0], sv[sv.len() - 1]);
                if lo <= RANK_TOL * hi {
                    return Err(Error::NotAcyclic(format!("restriction to C^({k}) is not injective")));
                }
                hi / lo
            }
            _ => 1.0,
        };
        condition.push(cond);
    }
    Ok(Splitting {
        basis_l,
        basis_c,
        condition,
    })
}

/// Restricted superdeterminant with its full-space cross-check.
#[derive(Clone, Debug)]
pub struct SdetValue {
    /// Σ_k (-1)^k log det(D^(k)|_{L^(k)}).
    pub log: C64,
    /// Σ_k (-1)^{k+1} k log det(D^(k)).
    pub log_full: C64,
    /// Per-degree log det of the restriction.
    pub log_det_l: Vec<C64>,
    /// ‖P_C D P_L‖ relative to ‖D‖.
    pub invariance_defect: f64,
}

impl SdetValue {
    pub fn value(&self) -> C64 {
        self.log.exp()
    }
}

fn restriction(d_op: &GradedMap, split: &Splitting, k: usize) -> CMat {
    split.basis_l[k].adjoint() * d_op.block(k) * &split.basis_l[k]
}

fn check_restrictable(d_op: &GradedMap, split: &Splitting) -> Result<f64> {
    if d_op.shift() != 0 {
        return Err(Error::Contract(format!("operator must have shift 0, got {}", d_op.shift())));
    }
    if split.basis_l.len() != d_op.degrees()
        || (0..d_op.degrees()).any(|k| split.basis_l[k].nrows() != d_op.dims()[k])
    {
        return Err(Error::Dimension {
            degree: 0,
            detail: "splitting does not match the operator".into(),
        });
    }
    let scale = d_op.norm().max(f64::MIN_POSITIVE);
    let mut defect = 0.0f64;
    for k in 0..d_op.degrees() {
        if split.basis_l[k].ncols() == 0 || split.basis_c[k].ncols() == 0 {
            continue;
        }
        let leak = split.basis_c[k].adjoint() * d_op.block(k) * &split.basis_l[k];
        defect = defect.max(linalg::norm(&leak) / scale);
    }
    if defect > INVARIANCE_TOL {
        return Err(Error::Contract(format!("operator does not preserve L: leakage {defect:e}")));
    }
    Ok(defect)
}

/// `Σ_k (-1)^k log det(D^(k)|_{L^(k)})`, cross-checked against
/// `Σ_k (-1)^{k+1} k log det D^(k)`.
pub fn sdet_restricted(d_op: &GradedMap, split: &Splitting) -> Result<SdetValue> {
    let invariance_defect = check_restrictable(d_op, split)?;
    let scale = d_op.norm().max(f64::MIN_POSITIVE);
    let mut log_det_l = Vec::with_capacity(d_op.degrees());
    for k in 0..d_op.degrees() {
        let r = restriction(d_op, split, k);
        let eig = linalg::eigenvalues(&r);
        if let Some(z) = eig.iter().find(|z| z.norm() <= 1e-12 * scale) {
            return Err(Error::NonRegular(format!(
                "restriction to L^({k}) has eigenvalue {z:e}"
            )));
        }
        log_det_l.push(eig.iter().map(|z| z.ln()).sum());
    }
    let log: C64 = log_det_l.iter().enumerate().map(|(k, &l)| l * sign(k)).sum();
    let mut log_full = real(0.0);
    for k in 1..d_op.degrees() {
        let eig = linalg::eigenvalues(d_op.block(k));
        if eig.iter().any(|z| z.norm() <= 1e-12 * scale) {
            return Err(Error::NonRegular(format!("D^({k}) is singular on the full degree")));
        }
        let ld: C64 = eig.iter().map(|z| z.ln()).sum();
        log_full -= ld * sign(k) * k as f64;
    }
    let gap = linalg::wrap_2pi_i(log - log_full).norm();
    if gap > SDET_CROSSCHECK_TOL * log.norm().max(1.0) {
        return Err(Error::Contract(format!(
            "restricted and full-space determinant formulas disagree by {gap:e}"
        )));
    }
    Ok(SdetValue {
        log,
        log_full,
        log_det_l,
        invariance_defect,
    })
}

/// Both supertrace formulas: `(Σ_k (-1)^k tr e^{-tD}|_{L^(k)},
/// Σ_k (-1)^{k+1} k tr e^{-tD^(k)})`.
pub fn supertrace_pair(d_op: &GradedMap, split: &Splitting, t: f64) -> Result<(C64, C64)> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("heat time must be positive, got {t}")));
    }
    check_restrictable(d_op, split)?;
    let mut restricted = real(0.0);
    let mut full = real(0.0);
    for k in 0..d_op.degrees() {
        let r = restriction(d_op, split, k);
        restricted += linalg::trace(&linalg::expm(&(r * real(-t)))) * sign(k);
        if k > 0 {
            let e = linalg::expm(&(d_op.block(k) * real(-t)));
            full -= linalg::trace(&e) * sign(k) * k as f64;
        }
    }
    Ok((restricted, full))
}

/// `str(e^{-tD}|_L)`, asserting agreement of the two formulas.
pub fn restricted_supertrace(d_op: &GradedMap, split: &Splitting, t: f64) -> Result<C64> {
    let (restricted, full) = supertrace_pair(d_op, split, t)?;
    let scale = restricted.norm().max(full.norm()).max(1.0);
    if (restricted - full).norm() > SUPERTRACE_CROSSCHECK_TOL * scale {
        return Err(Error::Contract(format!(
            "supertrace formulas disagree: {restricted} vs {full}"
        )));
    }
    Ok(restricted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::map::graded_commutator;
    use crate::linalg::{from_real_rows, zeros};

    fn toy() -> (GradedMap, GradedMap) {
        let d = GradedMap::new(vec![1, 1], 1, vec![from_real_rows(&[&[2.0]]), zeros(0, 1)]).unwrap();
        let delta = GradedMap::new(vec![1, 1], -1, vec![zeros(0, 1), from_real_rows(&[&[3.0]])]).unwrap();
        (d, delta)
    }

    #[test]
    fn toy_splitting() {
        let (_, delta) = toy();
        let s = split_complement(&delta).unwrap();
        assert!((s.projector_l(0)[(0, 0)] - 1.0).norm() < 1e-15);
        assert_eq!(s.projector_l(1).nrows(), 1);
        assert_eq!(s.projector_l(1)[(0, 0)], real(0.0));
    }

    #[test]
    fn toy_sdet_and_supertrace() {
        let (d, delta) = toy();
        let big_d = graded_commutator(&delta, &d).unwrap();
        let s = split_complement(&delta).unwrap();
        let v = sdet_restricted(&big_d, &s).unwrap();
        assert!((v.value() - 6.0).norm() < 1e-13);
        assert!((v.log_full - 6f64.ln()).norm() < 1e-14);
        let st = restricted_supertrace(&big_d, &s, 1.0).unwrap();
        assert!((st - (-6f64).exp()).norm() < 1e-15);
        // small t: str → dim L^(0) - dim L^(1) = 1
        let st = restricted_supertrace(&big_d, &s, 1e-9).unwrap();
        assert!((st - 1.0).norm() < 1e-7);
    }

    #[test]
    fn non_acyclic_is_rejected() {
        // dims (1,2,1) with δ: im δ ⊊ ker δ
        let delta = GradedMap::new(
            vec![1, 2, 1],
            -1,
            vec![zeros(0, 1), from_real_rows(&[&[0.0, 0.0]]), from_real_rows(&[&[1.0], &[0.0]])],
        )
        .unwrap();
        assert!(matches!(split_complement(&delta), Err(Error::NotAcyclic(_))));
    }

    #[test]
    fn singular_restriction_is_non_regular() {
        let (_, delta) = toy();
        let s = split_complement(&delta).unwrap();
        let zero = GradedMap::zero(&[1, 1], 0);
        assert!(matches!(sdet_restricted(&zero, &s), Err(Error::NonRegular(_))));
    }
}

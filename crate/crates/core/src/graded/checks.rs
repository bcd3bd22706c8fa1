use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RANK_TOL};

use super::map::GradedMap;

/// Tolerance for nilpotency and symmetry verdicts.
pub const CODIFFERENTIAL_TOL: f64 = 1e-10;

/// How a pairing matches degrees and which symmetry is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingKind {
    /// Degree `k` pairs with degree `n - k` bilinearly; δ must satisfy
    /// `⟨δα, β⟩ = ±⟨α, δβ⟩` with sign `(-1)^k` for `α` of degree `k`.
    DualityGraded,
    /// As `DualityGraded`, accepting either sign in each degree.
    DualityEither,
    /// Degree `k` pairs with itself sesquilinearly; δ must be the adjoint
    /// of `d`, `G_{k-1} δ^(k) = d^(k-1)† G_k`.
    Inner,
}

/// Per-degree Gram blocks of a nondegenerate pairing.
#[derive(Clone, Debug)]
pub struct PairingForm {
    pub grams: Vec<CMat>,
    pub kind: PairingKind,
}

impl PairingForm {
    pub fn new(grams: Vec<CMat>, kind: PairingKind) -> Result<Self> {
        let n = grams.len();
        for (k, g) in grams.iter().enumerate() {
            if !g.is_square() {
                return Err(Error::Dimension {
                    degree: k,
                    detail: format!("pairing block is {}x{}", g.nrows(), g.ncols()),
                });
            }
            if g.nrows() > 0 && linalg::numerical_rank(g, RANK_TOL, 0.0) < g.nrows() {
                return Err(Error::Singular(format!("pairing block at degree {k} of {n} is degenerate")));
            }
        }
        Ok(PairingForm { grams, kind })
    }

    /// Identity pairing of the given kind. For duality pairings this needs
    /// `dims[k] = dims[n - k]`.
    pub fn identity(dims: &[usize], kind: PairingKind) -> Result<Self> {
        let n = dims.len() - 1;
        if kind != PairingKind::Inner {
            if let Some(k) = (0..=n).find(|&k| dims[k] != dims[n - k]) {
                return Err(Error::Dimension {
                    degree: k,
                    detail: format!("duality pairing needs dims[{k}] = dims[{}]", n - k),
                });
            }
        }
        Self::new(dims.iter().map(|&m| linalg::identity(m)).collect(), kind)
    }
}

/// Diagnostics for a candidate codifferential.
#[derive(Clone, Debug)]
pub struct CodifferentialDiagnostic {
    pub delta_nilpotency: f64,
    pub d_nilpotency: f64,
    pub symmetry_defect: Option<f64>,
    pub pass: bool,
}

/// Report ‖δ²‖, ‖d²‖ and the symmetry defect of δ under `pairing`.
pub fn check_codifferential(delta: &GradedMap, d: &GradedMap, pairing: Option<&PairingForm>) -> Result<CodifferentialDiagnostic> {
    let delta_nilpotency = delta.compose(delta)?.norm();
    let d_nilpotency = d.compose(d)?.norm();
    let symmetry_defect = match pairing {
        Some(p) => Some(symmetry_defect(delta, d, p)?),
        None => None,
    };
    let pass = delta_nilpotency <= CODIFFERENTIAL_TOL
        && d_nilpotency <= CODIFFERENTIAL_TOL
        && symmetry_defect.is_none_or(|s| s <= CODIFFERENTIAL_TOL);
    Ok(CodifferentialDiagnostic {
        delta_nilpotency,
        d_nilpotency,
        symmetry_defect,
        pass,
    })
}

fn symmetry_defect(delta: &GradedMap, d: &GradedMap, p: &PairingForm) -> Result<f64> {
    let dims = delta.dims();
    let n = dims.len() - 1;
    if p.grams.len() != dims.len() {
        return Err(Error::Dimension {
            degree: p.grams.len().min(dims.len()),
            detail: "pairing has the wrong number of degrees".into(),
        });
    }
    let mut total = 0.0f64;
    match p.kind {
        PairingKind::Inner => {
            for k in 1..=n {
                let lhs = &p.grams[k - 1] * delta.block(k);
                let rhs = d.block(k - 1).adjoint() * &p.grams[k];
                total = total.max(linalg::norm(&(lhs - rhs)));
            }
        }
        PairingKind::DualityGraded | PairingKind::DualityEither => {
            // α in degree k, β in degree n-k+1:
            // (δα)^T G_{k-1} β = ± α^T G_k δβ
            for k in 1..=n {
                let lhs = delta.block(k).transpose() * &p.grams[k - 1];
                let rhs = &p.grams[k] * delta.block(n - k + 1);
                let plus = linalg::norm(&(&lhs - &rhs));
                let minus = linalg::norm(&(&lhs + &rhs));
                let defect = match p.kind {
                    PairingKind::DualityGraded if k % 2 == 0 => plus,
                    PairingKind::DualityGraded => minus,
                    _ => plus.min(minus),
                };
                total = total.max(defect);
            }
        }
    }
    Ok(total)
}

/// Per-degree rank data of a nilpotent map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeRanks {
    pub rank_in: usize,
    pub rank_out: usize,
    pub kernel_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    pub degrees: Vec<DegreeRanks>,
}

/// Decide whether the complex `(V, map)` is acyclic from singular values.
pub fn acyclicity_check(map: &GradedMap) -> Result<AcyclicityReport> {
    if map.shift().abs() != 1 {
        return Err(Error::Contract(format!("acyclicity needs shift ±1, got {}", map.shift())));
    }
    let sq = map.compose(map)?.norm();
    if sq > CODIFFERENTIAL_TOL * map.norm().powi(2).max(1.0) {
        return Err(Error::Contract(format!("map is not nilpotent: ‖map²‖ = {sq:e}")));
    }
    let scale = map.norm();
    let ranks: Vec<usize> = map.blocks().iter().map(|b| linalg::numerical_rank(b, RANK_TOL, scale)).collect();
    let degrees: Vec<DegreeRanks> = (0..map.degrees())
        .map(|k| {
            let rank_in = map.source_into(k).map_or(0, |s| ranks[s]);
            DegreeRanks {
                rank_in,
                rank_out: ranks[k],
                kernel_dim: map.dims()[k] - ranks[k],
            }
        })
        .collect();
    let acyclic = degrees
        .iter()
        .zip(map.dims())
        .all(|(r, &m)| r.rank_in + r.rank_out == m);
    Ok(AcyclicityReport { acyclic, degrees })
}

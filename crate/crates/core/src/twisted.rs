//! Cochain complexes of CW complexes twisted by a unitary character, and
//! their combinatorial torsion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{acyclicity_check, sdet_restricted, split_complement, AcyclicityReport, GradedMap};
use crate::hodge::hodge_laplacian;
use crate::linalg::{self, c, real, C64};

const UNITARITY_TOL: f64 = 1e-12;
const SQUARE_TOL: f64 = 1e-12;

/// `coeff · g^word · face` in the boundary of a cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryTerm {
    pub face: usize,
    pub coeff: i64,
    /// Exponent of each generator.
    #[serde(default)]
    pub word: Vec<i64>,
}

/// Cells per dimension, boundary words over the group ring and a character.
/// `boundaries[k][i]` lists the terms of the boundary of the `i`-th
/// `(k+1)`-cell in terms of `k`-cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistedCWData {
    #[serde(default)]
    pub generators: Vec<String>,
    pub cells: Vec<usize>,
    pub boundaries: Vec<Vec<Vec<BoundaryTerm>>>,
    /// Image of each generator as `[re, im]`.
    pub character: Vec<[f64; 2]>,
}

impl TwistedCWData {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn character_values(&self) -> Vec<C64> {
        self.character.iter().map(|z| c(z[0], z[1])).collect()
    }

    /// Same cells, character `g_j ↦ e^{i θ_j}`.
    pub fn with_angles(&self, angles: &[f64]) -> Result<Self> {
        if angles.len() != self.character.len() {
            return Err(Error::Data(format!(
                "{} angles for {} generators",
                angles.len(),
                self.character.len()
            )));
        }
        let mut out = self.clone();
        out.character = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if self.boundaries.len() + 1 != self.cells.len() {
            return Err(Error::Data(format!(
                "{} boundary lists for {} cell dimensions",
                self.boundaries.len(),
                self.cells.len()
            )));
        }
        if !self.generators.is_empty() && self.generators.len() != self.character.len() {
            return Err(Error::Data(format!(
                "{} generators but {} character values",
                self.generators.len(),
                self.character.len()
            )));
        }
        for (j, z) in self.character_values().iter().enumerate() {
            if (z.norm() - 1.0).abs() > UNITARITY_TOL {
                return Err(Error::Unitarity(format!("generator {j} maps to {z} with modulus {}", z.norm())));
            }
        }
        for (k, cells) in self.boundaries.iter().enumerate() {
            if cells.len() != self.cells[k + 1] {
                return Err(Error::Dimension {
                    degree: k + 1,
                    detail: format!("{} boundaries for {} cells", cells.len(), self.cells[k + 1]),
                });
            }
            for (i, terms) in cells.iter().enumerate() {
                for t in terms {
                    if t.face >= self.cells[k] {
                        return Err(Error::Data(format!(
                            "cell {i} of dimension {} has face {} but only {} cells of dimension {k}",
                            k + 1,
                            t.face,
                            self.cells[k]
                        )));
                    }
                    if t.word.len() > self.character.len() {
                        return Err(Error::Data(format!(
                            "word {:?} is longer than the generator list",
                            t.word
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn evaluate_word(chars: &[C64], word: &[i64]) -> C64 {
    word.iter()
        .zip(chars)
        .fold(real(1.0), |acc, (&e, &z)| acc * z.powi(e as i32))
}

/// Cochain differential: `d^(k)[i][j] = Σ coeff · χ(word)` over the terms of
/// the boundary of `(k+1)`-cell `i` with face `j`.
pub fn build_twisted_cochain(data: &TwistedCWData) -> Result<GradedMap> {
    data.validate()?;
    let chars = data.character_values();
    let d = GradedMap::from_fn(&data.cells, 1, |k, rows, cols| {
        let mut block = linalg::zeros(rows, cols);
        if rows > 0 {
            for (i, terms) in data.boundaries[k].iter().enumerate() {
                for t in terms {
                    block[(i, t.face)] += evaluate_word(&chars, &t.word) * t.coeff as f64;
                }
            }
        }
        block
    });
    let sq = d.compose(&d)?.norm();
    if sq > SQUARE_TOL * d.norm().powi(2).max(1.0) {
        return Err(Error::Data(format!("d² does not vanish for this character: ‖d²‖ = {sq:e}")));
    }
    Ok(d)
}

/// One vertex `v`, one edge `e` with `∂e = (g - 1) v`, character `g ↦ e^{iθ}`.
pub fn circle(theta: f64) -> TwistedCWData {
    TwistedCWData {
        generators: vec!["g".into()],
        cells: vec![1, 1],
        boundaries: vec![vec![vec![
            BoundaryTerm { face: 0, coeff: 1, word: vec![1] },
            BoundaryTerm { face: 0, coeff: -1, word: vec![0] },
        ]]],
        character: vec![[theta.cos(), theta.sin()]],
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Lens space `L(p, q)` with one cell per dimension 0..3 and boundaries
/// `g - 1`, `1 + g + … + g^{p-1}`, `g^{q'} - 1` where `q q' ≡ 1 mod p`.
/// The character sends `g` to `e^{2πik/p}`.
pub fn lens_space(p: i64, q: i64, k: i64) -> Result<TwistedCWData> {
    if p < 2 || gcd(p, q) != 1 {
        return Err(Error::Domain(format!("lens space needs p ≥ 2 and gcd(p, q) = 1, got p = {p}, q = {q}")));
    }
    let q_inv = (1..p).find(|r| (r * q).rem_euclid(p) == 1).unwrap_or(1);
    let term = |coeff, e| BoundaryTerm { face: 0, coeff, word: vec![e] };
    let angle = 2.0 * PI * k as f64 / p as f64;
    Ok(TwistedCWData {
        generators: vec!["g".into()],
        cells: vec![1, 1, 1, 1],
        boundaries: vec![
            vec![vec![term(1, 1), term(-1, 0)]],
            vec![(0..p).map(|e| term(1, e)).collect()],
            vec![vec![term(1, q_inv), term(-1, 0)]],
        ],
        character: vec![[angle.cos(), angle.sin()]],
    })
}

/// Combinatorial torsion with its ingredients.
#[derive(Clone, Debug)]
pub struct TorsionValue {
    pub torsion: f64,
    /// Restricted log sdet of the Hodge Laplacian.
    pub log_sdet: C64,
    pub acyclicity: AcyclicityReport,
}

/// `sdet(Δ|_L)^{1/2}` with identity Grams in the cell basis, `δ = d†`,
/// `Δ = δd + dδ` and `L = im δ`.
pub fn combinatorial_torsion(d: &GradedMap) -> Result<TorsionValue> {
    let acyclicity = acyclicity_check(d)?;
    if !acyclicity.acyclic {
        let bad = acyclicity
            .degrees
            .iter()
            .enumerate()
            .find(|(k, r)| r.rank_in + r.rank_out != d.dims()[*k])
            .map_or(0, |(k, _)| k);
        return Err(Error::NotAcyclic(format!("twisted cohomology is nonzero in degree {bad}")));
    }
    let grams: Vec<_> = d.dims().iter().map(|&m| linalg::identity(m)).collect();
    let (delta, lap) = hodge_laplacian(d, &grams)?;
    let split = split_complement(&delta)?;
    let sdet = sdet_restricted(&lap, &split)?;
    Ok(TorsionValue {
        torsion: (0.5 * sdet.log.re).exp(),
        log_sdet: sdet.log,
        acyclicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_differential() {
        let theta = 0.7;
        let d = build_twisted_cochain(&circle(theta)).unwrap();
        let want = C64::from_polar(1.0, theta) - 1.0;
        assert!((d.block(0)[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn trivial_character_is_not_acyclic() {
        let d = build_twisted_cochain(&circle(0.0)).unwrap();
        assert_eq!(d.block(0)[(0, 0)].norm(), 0.0);
        assert!(!acyclicity_check(&d).unwrap().acyclic);
        assert!(matches!(combinatorial_torsion(&d), Err(Error::NotAcyclic(_))));
    }

    #[test]
    fn circle_torsion_values() {
        let t = combinatorial_torsion(&build_twisted_cochain(&circle(PI)).unwrap()).unwrap();
        assert!((t.torsion - 2.0).abs() < 1e-14);
        let t = combinatorial_torsion(&build_twisted_cochain(&circle(2.0 * PI / 3.0)).unwrap()).unwrap();
        assert!((t.torsion - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bad_data_is_rejected() {
        let mut data = circle(1.0);
        data.character[0] = [1.1, 0.0];
        assert!(matches!(build_twisted_cochain(&data), Err(Error::Unitarity(_))));
        let data = lens_space(5, 2, 1).unwrap().with_angles(&[1.0]).unwrap();
        assert!(matches!(build_twisted_cochain(&data), Err(Error::Data(_))));
        let mut data = circle(1.0);
        data.boundaries[0][0][0].face = 3;
        assert!(build_twisted_cochain(&data).is_err());
        assert!(lens_space(4, 2, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let data = lens_space(7, 3, 2).unwrap();
        let text = serde_json::to_string(&data).unwrap();
        assert_eq!(TwistedCWData::parse(&text).unwrap(), data);
    }
}

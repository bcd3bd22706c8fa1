//! Seeded generators for random acyclic complexes and variations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hodge::adjoint_codifferential;
use crate::linalg::{self, c, real, CMat};

use super::map::GradedMap;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with entries uniform in the unit square of C.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `I + X/(2‖X‖_F)`: invertible with condition number at most 3.
pub fn random_well_conditioned(rng: &mut impl Rng, n: usize) -> CMat {
    let x = random_matrix(rng, n, n);
    let nx = linalg::norm(&x);
    if nx == 0.0 {
        return linalg::identity(n);
    }
    linalg::identity(n) + x * real(0.5 / nx)
}

/// Hermitian positive definite `B†B` with `B` well conditioned.
pub fn random_positive_gram(rng: &mut impl Rng, n: usize) -> CMat {
    let b = random_well_conditioned(rng, n);
    b.adjoint() * b
}

/// Acyclic differential with `rank d^(k) = ranks[k]`, conjugated by random
/// well-conditioned bases. Degrees run `0..=ranks.len()`.
pub fn random_acyclic_with_ranks(rng: &mut impl Rng, ranks: &[usize]) -> GradedMap {
    let n = ranks.len();
    let dims: Vec<usize> = (0..=n)
        .map(|k| {
            let below = if k > 0 { ranks[k - 1] } else { 0 };
            let above = if k < n { ranks[k] } else { 0 };
            below + above
        })
        .collect();
    // canonical form: degree k = [image from below | complement]; d^(k)
    // sends the complement isomorphically onto the image part of k+1
    let bases: Vec<CMat> = dims.iter().map(|&m| random_well_conditioned(rng, m)).collect();
    GradedMap::from_fn(&dims, 1, |k, rows, cols| {
        let below = if k > 0 { ranks[k - 1] } else { 0 };
        let iso = random_well_conditioned(rng, ranks[k]);
        let mut canon = linalg::zeros(rows, cols);
        canon.view_mut((0, below), (ranks[k], ranks[k])).copy_from(&iso);
        let inv = linalg::inverse(&bases[k], "random basis").expect("well-conditioned basis");
        &bases[k + 1] * canon * inv
    })
}

/// Random acyclic differential with 2 to 5 degrees and ranks 1 to 4, so
/// every degree has dimension at most 8.
pub fn random_acyclic_complex(seed: u64) -> GradedMap {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(1..=4usize);
    let ranks: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4usize)).collect();
    random_acyclic_with_ranks(&mut rng, &ranks)
}

/// Random shift-0 map with blocks scaled to Frobenius norm `scale`.
pub fn random_endomorphism(rng: &mut impl Rng, dims: &[usize], scale: f64) -> GradedMap {
    GradedMap::from_fn(dims, 0, |_, m, _| {
        let x = random_matrix(rng, m, m);
        let nx = linalg::norm(&x);
        if nx == 0.0 {
            x
        } else {
            x * real(scale / nx)
        }
    })
}

/// Remove the supertrace by adjusting the trace of the lowest nonempty
/// degree.
pub fn make_supertraceless(theta: &GradedMap) -> GradedMap {
    let s = theta.supertrace();
    let mut out = theta.clone();
    if let Some(k) = (0..theta.degrees()).find(|&k| theta.dims()[k] > 0) {
        let m = theta.dims()[k];
        // (-1)^k tr changes by (-1)^k · (-(-1)^k s) = -s
        let corr = if k % 2 == 0 { -s } else { s } / m as f64;
        let blk = out.block_mut(k);
        for i in 0..m {
            blk[(i, i)] += corr;
        }
    }
    out
}

/// Acyclic differential with random positive Grams and their adjoint
/// codifferential.
#[derive(Clone, Debug)]
pub struct RandomPair {
    pub d: GradedMap,
    pub delta: GradedMap,
    pub grams: Vec<CMat>,
}

pub fn random_regular_pair(seed: u64) -> Result<RandomPair> {
    let d = random_acyclic_complex(seed);
    let mut rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let grams: Vec<CMat> = d.dims().iter().map(|&m| random_positive_gram(&mut rng, m)).collect();
    let delta = adjoint_codifferential(&d, &grams)?;
    Ok(RandomPair { d, delta, grams })
}

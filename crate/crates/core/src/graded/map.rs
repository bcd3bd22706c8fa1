use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, C64};

/// Dimensions of a finite graded vector space, degrees `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVectorSpace {
    pub dims: Vec<usize>,
}

impl GradedVectorSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Contract(format!(
                "a graded space needs at least degrees 0 and 1, got {} degrees",
                dims.len()
            )));
        }
        Ok(GradedVectorSpace { dims })
    }

    /// Top degree `n`.
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }
}

/// A degree-indexed family of matrices. Block `k` maps degree `k` to
/// degree `k + shift` and has shape `dims[k + shift] × dims[k]`; when the
/// target degree is out of range the block has zero rows.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMap {
    dims: Vec<usize>,
    shift: i32,
    blocks: Vec<CMat>,
}

impl GradedMap {
    pub fn new(dims: Vec<usize>, shift: i32, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != dims.len() {
            return Err(Error::Dimension {
                degree: blocks.len().min(dims.len()),
                detail: format!("{} blocks for {} degrees", blocks.len(), dims.len()),
            });
        }
        for (k, b) in blocks.iter().enumerate() {
            let rows = target_dim(&dims, k, shift);
            if b.nrows() != rows || b.ncols() != dims[k] {
                return Err(Error::Dimension {
                    degree: k,
                    detail: format!(
                        "block has shape {}x{}, expected {}x{}",
                        b.nrows(),
                        b.ncols(),
                        rows,
                        dims[k]
                    ),
                });
            }
        }
        Ok(GradedMap { dims, shift, blocks })
    }

    pub fn zero(dims: &[usize], shift: i32) -> Self {
        let blocks = (0..dims.len())
            .map(|k| linalg::zeros(target_dim(dims, k, shift), dims[k]))
            .collect();
        GradedMap {
            dims: dims.to_vec(),
            shift,
            blocks,
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::from_fn(dims, 0, |_, rows, _| linalg::identity(rows))
    }

    /// Build block `k` from `f(k, rows, cols)`. Out-of-range targets get an
    /// empty block without calling `f`.
    pub fn from_fn(dims: &[usize], shift: i32, mut f: impl FnMut(usize, usize, usize) -> CMat) -> Self {
        let blocks = (0..dims.len())
            .map(|k| {
                let rows = target_dim(dims, k, shift);
                if target_degree(dims.len(), k, shift).is_some() {
                    let b = f(k, rows, dims[k]);
                    assert_eq!((b.nrows(), b.ncols()), (rows, dims[k]), "block {k} has the wrong shape");
                    b
                } else {
                    linalg::zeros(0, dims[k])
                }
            })
            .collect();
        GradedMap {
            dims: dims.to_vec(),
            shift,
            blocks,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn degrees(&self) -> usize {
        self.dims.len()
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut CMat {
        &mut self.blocks[k]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// Target degree of block `k`, if in range.
    pub fn target(&self, k: usize) -> Option<usize> {
        target_degree(self.dims.len(), k, self.shift)
    }

    /// Source degree of the block landing in degree `k`, if any.
    pub fn source_into(&self, k: usize) -> Option<usize> {
        let s = k as i64 - self.shift as i64;
        (0..self.dims.len() as i64).contains(&s).then_some(s as usize)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_dims(other)?;
        let shift = self.shift + other.shift;
        let blocks = (0..self.dims.len())
            .map(|k| match other.target(k) {
                Some(mid) => match self.target(mid) {
                    Some(_) => Ok(&self.blocks[mid] * &other.blocks[k]),
                    None => Ok(linalg::zeros(target_dim(&self.dims, k, shift), self.dims[k])),
                },
                None => Ok(linalg::zeros(target_dim(&self.dims, k, shift), self.dims[k])),
            })
            .collect::<Result<Vec<_>>>()?;
        GradedMap::new(self.dims.clone(), shift, blocks)
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> GradedMap {
        self.map_blocks(|_, b| b * c)
    }

    /// Apply `f` to every in-range block.
    pub fn map_blocks(&self, mut f: impl FnMut(usize, &CMat) -> CMat) -> GradedMap {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| if b.is_empty() { b.clone() } else { f(k, b) })
            .collect();
        GradedMap {
            dims: self.dims.clone(),
            shift: self.shift,
            blocks,
        }
    }

    /// Blockwise conjugate transpose, a map of shift `-shift`.
    pub fn adjoint(&self) -> GradedMap {
        GradedMap::from_fn(&self.dims, -self.shift, |k, _, _| {
            let src = self.source_into(k).expect("adjoint block in range");
            self.blocks[src].adjoint()
        })
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::norm(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Supertrace Σ_k (-1)^k tr(block k) of a shift-0 map.
    pub fn supertrace(&self) -> C64 {
        assert_eq!(self.shift, 0, "supertrace of a map with nonzero shift");
        self.blocks
            .iter()
            .enumerate()
            .map(|(k, b)| linalg::trace(b) * sign(k))
            .sum()
    }

    fn check_dims(&self, other: &GradedMap) -> Result<()> {
        if self.dims != other.dims {
            let degree = self
                .dims
                .iter()
                .zip(&other.dims)
                .position(|(a, b)| a != b)
                .unwrap_or(self.dims.len().min(other.dims.len()));
            return Err(Error::Dimension {
                degree,
                detail: format!("graded dimensions {:?} and {:?} differ", self.dims, other.dims),
            });
        }
        Ok(())
    }

    fn combine(&self, other: &GradedMap, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<GradedMap> {
        self.check_dims(other)?;
        if self.shift != other.shift {
            return Err(Error::Dimension {
                degree: 0,
                detail: format!("shifts {} and {} differ", self.shift, other.shift),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(GradedMap {
            dims: self.dims.clone(),
            shift: self.shift,
            blocks,
        })
    }
}

/// (-1)^k as a complex scalar.
pub fn sign(k: usize) -> C64 {
    if k % 2 == 0 {
        real(1.0)
    } else {
        real(-1.0)
    }
}

fn target_degree(n_degrees: usize, k: usize, shift: i32) -> Option<usize> {
    let t = k as i64 + shift as i64;
    (0..n_degrees as i64).contains(&t).then_some(t as usize)
}

fn target_dim(dims: &[usize], k: usize, shift: i32) -> usize {
    target_degree(dims.len(), k, shift).map_or(0, |t| dims[t])
}

/// Graded commutator: `ab + ba` when both maps are odd, `ab - ba` otherwise.
pub fn commutator(a: &GradedMap, b: &GradedMap) -> Result<GradedMap> {
    let ab = a.compose(b)?;
    let ba = b.compose(a)?;
    if a.shift().rem_euclid(2) == 1 && b.shift().rem_euclid(2) == 1 {
        ab.add(&ba)
    } else {
        ab.sub(&ba)
    }
}

/// Characteristic operator `D = δd + dδ`.
pub fn graded_commutator(delta: &GradedMap, d: &GradedMap) -> Result<GradedMap> {
    if delta.shift() != -1 || d.shift() != 1 {
        return Err(Error::Contract(format!(
            "expected shifts -1 and +1, got {} and {}",
            delta.shift(),
            d.shift()
        )));
    }
    commutator(delta, d)
}

//! JSON form `{dims, maps: {name: {shift, blocks}}}` with complex entries as
//! `[re, im]` pairs. Blocks are lists of rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

use super::map::GradedMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub shift: i32,
    pub blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub dims: Vec<usize>,
    pub maps: BTreeMap<String, MapJson>,
}

impl ComplexJson {
    pub fn from_maps<'a>(dims: &[usize], maps: impl IntoIterator<Item = (&'a str, &'a GradedMap)>) -> Self {
        ComplexJson {
            dims: dims.to_vec(),
            maps: maps
                .into_iter()
                .map(|(name, m)| (name.to_string(), map_to_json(m)))
                .collect(),
        }
    }

    pub fn map(&self, name: &str) -> Result<GradedMap> {
        let m = self
            .maps
            .get(name)
            .ok_or_else(|| Error::Data(format!("complex has no map named {name:?}")))?;
        map_from_json(&self.dims, m)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_string_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn map_to_json(m: &GradedMap) -> MapJson {
    MapJson {
        shift: m.shift(),
        blocks: m
            .blocks()
            .iter()
            .map(|b| {
                (0..b.nrows())
                    .map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect())
                    .collect()
            })
            .collect(),
    }
}

pub fn map_from_json(dims: &[usize], m: &MapJson) -> Result<GradedMap> {
    if m.blocks.len() != dims.len() {
        return Err(Error::Dimension {
            degree: m.blocks.len().min(dims.len()),
            detail: format!("{} blocks for {} degrees", m.blocks.len(), dims.len()),
        });
    }
    let blocks = m
        .blocks
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            let ncols = dims[k];
            if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
                return Err(Error::Dimension {
                    degree: k,
                    detail: format!("row {bad} has {} entries, expected {ncols}", rows[bad].len()),
                });
            }
            Ok(CMat::from_fn(rows.len(), ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
        })
        .collect::<Result<Vec<_>>>()?;
    GradedMap::new(dims.to_vec(), m.shift, blocks)
}

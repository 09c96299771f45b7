//! JSON schemas for the file formats the command-line tools exchange:
//! sampled diffeomorphisms, loops, vector fields, covers, words, element
//! stores, and derivations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cocycles::VectorField;
use crate::error::{Error, Result};
use crate::geometry::{Cover, Interval};
use crate::linalg::CMat;
use crate::loops::{Group, LieLoop, Loop};

fn file_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::File {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| file_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| file_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| file_err(path, e))
}

/// A vector field on the circle by Fourier modes: {"modes": {"-2": [re, im]}}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorFieldJson {
    pub modes: BTreeMap<String, [f64; 2]>,
}

impl VectorFieldJson {
    pub fn to_field(&self) -> Result<VectorField<Complex64>> {
        let mut f = VectorField::zero();
        for (key, [re, im]) in &self.modes {
            let n: i64 = key
                .parse()
                .map_err(|_| Error::Precondition(format!("bad mode index {key:?}")))?;
            f.add_mode(n, Complex64::new(*re, *im));
        }
        Ok(f)
    }

    pub fn from_field(f: &VectorField<Complex64>) -> Self {
        let modes = f
            .modes()
            .iter()
            .map(|(n, c)| (n.to_string(), [c.re, c.im]))
            .collect();
        VectorFieldJson { modes }
    }
}

/// A sampled loop or algebra path: values are row-major complex matrices,
/// each entry an [re, im] pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopJson {
    pub group: String,
    pub n: usize,
    pub values: Vec<Vec<[f64; 2]>>,
}

fn values_to_matrices(group: Group, n: usize, values: &[Vec<[f64; 2]>]) -> Result<Vec<CMat>> {
    let size = group.matrix_size();
    if values.len() != n {
        return Err(Error::Precondition(format!(
            "value count {} does not match n = {n}",
            values.len()
        )));
    }
    values
        .iter()
        .map(|row| {
            if row.len() != size * size {
                return Err(Error::Precondition(format!(
                    "sample has {} entries, expected {}",
                    row.len(),
                    size * size
                )));
            }
            Ok(CMat::from_row_slice(
                size,
                size,
                &row.iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect::<Vec<_>>(),
            ))
        })
        .collect()
}

fn matrices_to_values(mats: impl Iterator<Item = CMat>) -> Vec<Vec<[f64; 2]>> {
    mats.map(|m| {
        // row-major walk of the matrix entries
        let size = m.nrows();
        let mut row = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let c = m[(i, j)];
                row.push([c.re, c.im]);
            }
        }
        row
    })
    .collect()
}

impl LoopJson {
    pub fn to_loop(&self) -> Result<Loop> {
        let group = Group::parse(&self.group)?;
        Loop::new(group, values_to_matrices(group, self.n, &self.values)?)
    }

    pub fn to_lie_loop(&self) -> Result<LieLoop> {
        let group = Group::parse(&self.group)?;
        LieLoop::new(group, values_to_matrices(group, self.n, &self.values)?)
    }

    pub fn from_loop(gamma: &Loop) -> Self {
        LoopJson {
            group: gamma.group().to_string(),
            n: gamma.n_samples(),
            values: matrices_to_values((0..gamma.n_samples()).map(|k| gamma.value(k).clone())),
        }
    }

    pub fn from_lie_loop(l: &LieLoop) -> Self {
        LoopJson {
            group: l.group().to_string(),
            n: l.n_samples(),
            values: matrices_to_values((0..l.n_samples()).map(|k| l.value(k).clone())),
        }
    }
}

/// One generator entry of an element store manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreGeneratorJson {
    pub label: Interval,
    pub cover_index: Option<usize>,
    /// element file, relative to the manifest's directory
    pub file: String,
}

/// `manifest.json` of an element store directory: the cover, the mode, and
/// one labeled element file per generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreManifestJson {
    pub mode: String,
    pub cover: Cover,
    pub generators: Vec<StoreGeneratorJson>,
}

pub fn read_store_manifest(dir: &Path) -> Result<StoreManifestJson> {
    read_json(&dir.join("manifest.json"))
}

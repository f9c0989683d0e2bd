//! On-disk datasets: sampled inputs and reference trajectories.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sclon_core::{Family, InputSample, Representation, Trajectory};

use crate::array::{ArrayFile, ElementKind};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

pub fn inputs_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("inputs_{}.scln", split.name()))
}

pub fn aux_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("inputs_{}_aux.scln", split.name()))
}

pub fn refs_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("refs_{}.scln", split.name()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitEntry {
    pub count: usize,
    /// Sample index of the first draw.
    pub first_sample: u64,
    pub file: String,
    pub aux_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub family: String,
    pub input_kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub train: SplitEntry,
    pub test: SplitEntry,
}

impl Manifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join("manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = Self::path(dir);
        std::fs::write(&path, serde_json::to_string_pretty(self).expect("manifest serializes"))
            .map_err(|e| CliError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = Self::path(dir);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
    }
}

/// Writes the values (and the raw draws, when present) of `samples`.
pub fn write_inputs(dir: &Path, split: Split, samples: &[InputSample]) -> Result<Option<PathBuf>> {
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.values.clone()).collect();
    ArrayFile::from_rows(ElementKind::F64, &rows)?.write(&inputs_path(dir, split))?;
    if samples.iter().all(|s| s.aux.is_empty()) {
        return Ok(None);
    }
    let aux: Vec<Vec<f64>> = samples.iter().map(|s| s.aux.clone()).collect();
    let path = aux_path(dir, split);
    ArrayFile::from_rows(ElementKind::F64, &aux)?.write(&path)?;
    Ok(Some(path))
}

pub fn read_inputs(dir: &Path, split: Split, family: Family, input_len: usize) -> Result<Vec<InputSample>> {
    let a = ArrayFile::read(&inputs_path(dir, split))?;
    if a.kind != ElementKind::F64 || a.dims.len() != 2 || a.dims[1] != input_len {
        return Err(CliError::format(format!(
            "{} inputs have dims {:?}, expected [P, {input_len}]",
            split.name(),
            a.dims
        )));
    }
    let mut samples: Vec<InputSample> = a.rows().map(|r| InputSample::new(family, r.to_vec())).collect();
    let aux = aux_path(dir, split);
    if aux.exists() {
        let x = ArrayFile::read(&aux)?;
        if x.dims[0] != samples.len() {
            return Err(CliError::format("aux file has a different sample count"));
        }
        for (s, r) in samples.iter_mut().zip(x.rows()) {
            s.aux = r.to_vec();
        }
    }
    Ok(samples)
}

/// `P × snapshots × len` array; Fourier trajectories are stored as complex.
pub fn write_trajectories(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let first = trajs.first().ok_or_else(|| CliError::format("no trajectories to write"))?;
    let kind = if first.representation.is_complex() { ElementKind::C128 } else { ElementKind::F64 };
    let steps = first.len();
    let len = first.representation.snapshot_len() / kind.width();
    if trajs.iter().any(|t| t.len() != steps || t.representation != first.representation) {
        return Err(CliError::format("trajectories differ in length or representation"));
    }
    let data: Vec<f64> = trajs.iter().flat_map(|t| t.snapshots.iter().flatten().copied()).collect();
    ArrayFile::new(kind, vec![trajs.len(), steps, len], data)?.write(path)
}

pub fn read_trajectories(path: &Path, representation: Representation) -> Result<Vec<Trajectory>> {
    let a = ArrayFile::read(path)?;
    let kind = if representation.is_complex() { ElementKind::C128 } else { ElementKind::F64 };
    let len = representation.snapshot_len() / kind.width();
    if a.kind != kind || a.dims.len() != 3 || a.dims[2] != len {
        return Err(CliError::format(format!(
            "{}: dims {:?} of kind {} do not hold {} snapshots",
            path.display(),
            a.dims,
            a.kind.name(),
            representation.name()
        )));
    }
    let snap = representation.snapshot_len();
    a.rows()
        .map(|r| Trajectory::new(representation, r.chunks(snap).map(<[f64]>::to_vec).collect()).map_err(CliError::from))
        .collect()
}

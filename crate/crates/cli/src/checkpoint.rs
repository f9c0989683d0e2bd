//! Per-segment checkpoints: a JSON record plus two ArrayFiles (parameters
//! and the anchors the next segment starts from). The record carries the
//! full architecture, so it parses without the run config, and the config
//! hash, so a resume under a different config is refused.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sclon_core::net::{Activation, Head, LayerKind, LayerSpec, NetworkArch, NetworkParams, OutputMap};
use sclon_core::optim::StopReason;
use sclon_core::trainer::{SegmentRecord, TrainState};

use crate::array::{ArrayFile, ElementKind};
use crate::error::{CliError, Code, Result};

pub const FORMAT: &str = "sclon-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub kind: String,
    pub width: usize,
    pub kernel: usize,
    pub activation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchRecord {
    pub input_len: usize,
    pub grid_side: usize,
    pub layers: Vec<LayerRecord>,
    pub steps: usize,
    pub snapshot_len: usize,
    /// `real`, `enriched`, `hermitian1d` or `hermitian2d`.
    pub output: String,
    /// Grid size of Fourier outputs.
    pub output_n: Option<usize>,
    /// Corrector diffusivity of enriched outputs.
    pub output_nu: Option<f64>,
    pub head: String,
    pub input_scale: f64,
    pub output_scale: f64,
    pub anchor_skip: bool,
    pub anchor_input: bool,
    pub coords_input: bool,
}

impl ArchRecord {
    pub fn from_arch(a: &NetworkArch) -> Self {
        let (output, output_n, output_nu) = match a.output {
            OutputMap::Real => ("real", None, None),
            OutputMap::Enriched { nu } => ("enriched", None, Some(nu)),
            OutputMap::Hermitian1d { n } => ("hermitian1d", Some(n), None),
            OutputMap::Hermitian2d { n } => ("hermitian2d", Some(n), None),
        };
        Self {
            input_len: a.input_len,
            grid_side: a.grid_side,
            layers: a
                .layers
                .iter()
                .map(|l| LayerRecord {
                    kind: l.kind.name().into(),
                    width: l.width,
                    kernel: l.kernel,
                    activation: l.activation.name().into(),
                })
                .collect(),
            steps: a.steps,
            snapshot_len: a.snapshot_len,
            output: output.into(),
            output_n,
            output_nu,
            head: a.head.name().into(),
            input_scale: a.input_scale,
            output_scale: a.output_scale,
            anchor_skip: a.anchor_skip,
            anchor_input: a.anchor_input,
            coords_input: a.coords_input,
        }
    }

    pub fn to_arch(&self) -> Result<NetworkArch> {
        let bad = |m: String| CliError::format(format!("checkpoint architecture: {m}"));
        let layers = self
            .layers
            .iter()
            .map(|l| {
                Ok(LayerSpec {
                    kind: LayerKind::from_name(&l.kind).ok_or_else(|| bad(format!("unknown layer kind `{}`", l.kind)))?,
                    width: l.width,
                    kernel: l.kernel,
                    activation: Activation::from_name(&l.activation)
                        .ok_or_else(|| bad(format!("unknown activation `{}`", l.activation)))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let need_n = || self.output_n.ok_or_else(|| bad("missing output_n".into()));
        let output = match self.output.as_str() {
            "real" => OutputMap::Real,
            "enriched" => OutputMap::Enriched { nu: self.output_nu.ok_or_else(|| bad("missing output_nu".into()))? },
            "hermitian1d" => OutputMap::Hermitian1d { n: need_n()? },
            "hermitian2d" => OutputMap::Hermitian2d { n: need_n()? },
            s => return Err(bad(format!("unknown output map `{s}`"))),
        };
        let arch = NetworkArch {
            input_len: self.input_len,
            grid_side: self.grid_side,
            layers,
            steps: self.steps,
            snapshot_len: self.snapshot_len,
            output,
            head: Head::from_name(&self.head).ok_or_else(|| bad(format!("unknown head `{}`", self.head)))?,
            input_scale: self.input_scale,
            output_scale: self.output_scale,
            anchor_skip: self.anchor_skip,
            anchor_input: self.anchor_input,
            coords_input: self.coords_input,
        };
        arch.layout().map_err(|e| bad(e.to_string()))?;
        Ok(arch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    /// 1-based index of the segment these parameters belong to.
    pub segment: usize,
    pub seed: u64,
    pub arch: ArchRecord,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: String,
    pub history: Vec<f64>,
    pub params_file: String,
    pub anchors_file: String,
}

pub fn checkpoint_dir(out: &Path) -> PathBuf {
    out.join("checkpoints")
}

fn record_path(dir: &Path, segment: usize) -> PathBuf {
    dir.join(format!("segment_{segment:03}.json"))
}

fn stop_from_name(s: &str) -> Result<StopReason> {
    [StopReason::Converged, StopReason::Plateau, StopReason::MaxIterations, StopReason::LineSearchFailed]
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| CliError::format(format!("unknown stop reason `{s}`")))
}

/// Writes the checkpoint of the segment `state` just finished.
pub fn write_segment(dir: &Path, state: &TrainState, config_hash: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let segment = state.segment;
    let rec = state.segments.last().ok_or_else(|| CliError::format("no trained segment to checkpoint"))?;
    let params_file = format!("segment_{segment:03}_params.scln");
    let anchors_file = format!("segment_{segment:03}_anchors.scln");
    ArrayFile::new(ElementKind::F64, vec![rec.params.len()], rec.params.clone())?.write(&dir.join(&params_file))?;
    ArrayFile::from_rows(ElementKind::F64, &state.anchors)?.write(&dir.join(&anchors_file))?;
    let ck = Checkpoint {
        format: FORMAT.into(),
        version: VERSION,
        config_hash: config_hash.into(),
        segment,
        seed: state.seed,
        arch: ArchRecord::from_arch(&state.params.arch),
        iterations: rec.iterations,
        evaluations: rec.evaluations,
        stop: rec.stop.name().into(),
        history: rec.history.clone(),
        params_file,
        anchors_file,
    };
    let path = record_path(dir, segment);
    let text = serde_json::to_string_pretty(&ck).expect("checkpoint serializes");
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn read_record(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let ck: Checkpoint =
        serde_json::from_str(&text).map_err(|e| CliError::format(format!("{}: {e}", path.display())))?;
    if ck.format != FORMAT || ck.version != VERSION {
        return Err(CliError::format(format!("{}: not a version {VERSION} checkpoint", path.display())));
    }
    Ok(ck)
}

/// A checkpoint with its arrays loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSegment {
    pub record: Checkpoint,
    pub params: NetworkParams,
    pub anchors: Vec<Vec<f64>>,
}

pub fn load_segment(dir: &Path, segment: usize) -> Result<LoadedSegment> {
    let record = read_record(&record_path(dir, segment))?;
    if record.segment != segment {
        return Err(CliError::format(format!("checkpoint file for segment {segment} claims segment {}", record.segment)));
    }
    let arch = record.arch.to_arch()?;
    let flat = ArrayFile::read(&dir.join(&record.params_file))?;
    if flat.kind != ElementKind::F64 || flat.dims.len() != 1 {
        return Err(CliError::format("parameter file must be a rank-1 f64 array"));
    }
    let params = NetworkParams::from_flat(arch, flat.data).map_err(|e| CliError::format(e.to_string()))?;
    let a = ArrayFile::read(&dir.join(&record.anchors_file))?;
    let anchors = a.rows().map(<[f64]>::to_vec).collect();
    Ok(LoadedSegment { record, params, anchors })
}

/// Number of consecutive checkpoints `1..=k` present in `dir`.
pub fn count_segments(dir: &Path) -> usize {
    (1..).take_while(|&q| record_path(dir, q).exists()).count()
}

/// Loads checkpoints `1..=k` and checks each against `config_hash`.
pub fn load_all(dir: &Path, config_hash: &str) -> Result<Vec<LoadedSegment>> {
    let k = count_segments(dir);
    let mut out = Vec::with_capacity(k);
    for q in 1..=k {
        let s = load_segment(dir, q)?;
        if s.record.config_hash != config_hash {
            return Err(CliError::new(
                Code::ConfigMismatch,
                format!(
                    "checkpoint segment {q} was written under config {}, current config is {config_hash}",
                    s.record.config_hash
                ),
            ));
        }
        out.push(s);
    }
    Ok(out)
}

/// Rebuilds the training state after the last loaded segment.
pub fn resume_state(loaded: Vec<LoadedSegment>, fresh: TrainState) -> Result<TrainState> {
    let Some(last) = loaded.last() else { return Ok(fresh) };
    if last.params.arch != fresh.params.arch {
        return Err(CliError::new(Code::ConfigMismatch, "checkpoint architecture differs from the config"));
    }
    let segment = last.record.segment;
    let params = last.params.clone();
    let anchors = last.anchors.clone();
    let seed = last.record.seed;
    let segments = loaded
        .into_iter()
        .map(|s| {
            Ok(SegmentRecord {
                params: s.params.flat,
                history: s.record.history,
                iterations: s.record.iterations,
                evaluations: s.record.evaluations,
                stop: stop_from_name(&s.record.stop)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if anchors.len() != fresh.anchors.len() {
        return Err(CliError::format("checkpoint anchors do not match the training set size"));
    }
    Ok(TrainState { segment, params, anchors, segments, seed })
}

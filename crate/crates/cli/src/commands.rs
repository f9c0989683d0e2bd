//! The subcommands. Each reads the run config, works inside the output
//! directory, and leaves a provenance record next to what it wrote.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sclon_core::metrics::{error_triple, BenchmarkRow, ErrorReport, TABLE_COLUMNS};
use sclon_core::net::NetworkParams;
use sclon_core::residuals::residual_check;
use sclon_core::solvers::solve;
use sclon_core::trainer::{predict, train_segment, TrainState};
use sclon_core::Trajectory;

use crate::array::{ArrayFile, ElementKind};
use crate::checkpoint::{self, checkpoint_dir};
use crate::config::{Resolved, RunConfig};
use crate::dataset::{self, Manifest, Split, SplitEntry};
use crate::error::{CliError, Code, Result};

/// Shared state of a command: the parsed and resolved config and the
/// output directory.
pub struct Run {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub hash: String,
    pub out: PathBuf,
}

impl Run {
    pub fn open(config_path: &Path, out: Option<&Path>) -> Result<Self> {
        let config = RunConfig::load(config_path)?;
        Self::from_config(config, out)
    }

    pub fn from_config(config: RunConfig, out: Option<&Path>) -> Result<Self> {
        let resolved = config.resolve()?;
        let hash = resolved.hash();
        let out = out.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir());
        std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        Ok(Self { config, resolved, hash, out })
    }

    fn provenance(&self, command: &str, extra: serde_json::Value) -> Result<()> {
        #[derive(Serialize)]
        struct Provenance<'a> {
            command: &'a str,
            args: Vec<String>,
            config: String,
            config_hash: &'a str,
            sampling_seed: u64,
            init_seed: u64,
            sclon_version: &'a str,
            unix_time: u64,
            details: serde_json::Value,
        }
        let p = Provenance {
            command,
            args: std::env::args().collect(),
            config: self.config.to_toml(),
            config_hash: &self.hash,
            sampling_seed: self.resolved.sampling.seed,
            init_seed: self.resolved.init_seed,
            sclon_version: env!("CARGO_PKG_VERSION"),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            details: extra,
        };
        let path = self.out.join(format!("provenance_{command}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&p).expect("provenance serializes"))
            .map_err(|e| CliError::io(&path, e))
    }

    fn inputs(&self, split: Split) -> Result<Vec<sclon_core::InputSample>> {
        let p = &self.resolved.problem;
        dataset::read_inputs(&self.out, split, p.family, p.input_len())
    }
}

pub fn gen_inputs(run: &Run, log: &mut dyn Write) -> Result<()> {
    let r = &run.resolved;
    let sampler = r.sampling.sampler(&r.problem)?;
    let train = sampler.draw_many(0, r.sampling.p_train)?;
    let test = sampler.draw_many(r.sampling.test_offset, r.sampling.p_test)?;
    let mut entries = Vec::new();
    for (split, samples, first) in [(Split::Train, &train, 0), (Split::Test, &test, r.sampling.test_offset)] {
        let aux = if samples.is_empty() { None } else { dataset::write_inputs(&run.out, split, samples)? };
        entries.push(SplitEntry {
            count: samples.len(),
            first_sample: first,
            file: dataset::inputs_path(Path::new(""), split).display().to_string(),
            aux_file: aux.map(|p| p.file_name().expect("file").to_string_lossy().into_owned()),
        });
        writeln!(log, "gen-inputs: {} {} samples", samples.len(), split.name()).ok();
    }
    let test_entry = entries.pop().expect("two splits");
    let train_entry = entries.pop().expect("two splits");
    Manifest {
        family: r.problem.family.name().into(),
        input_kind: r.problem.family.input_kind().name().into(),
        seed: r.sampling.seed,
        config_hash: run.hash.clone(),
        train: train_entry,
        test: test_entry,
    }
    .write(&run.out)?;
    run.provenance("gen-inputs", serde_json::json!({ "p_train": train.len(), "p_test": test.len() }))
}

pub fn solve_ref(run: &Run, split: Split, log: &mut dyn Write) -> Result<()> {
    let inputs = run.inputs(split)?;
    let mut trajs = Vec::with_capacity(inputs.len());
    let mut warnings = Vec::new();
    for (p, s) in inputs.iter().enumerate() {
        let t = solve(&run.resolved.problem, s)?;
        for w in &t.warnings {
            writeln!(log, "warning: sample {p}: {w}").ok();
            warnings.push(format!("sample {p}: {w}"));
        }
        trajs.push(t);
    }
    dataset::write_trajectories(&dataset::refs_path(&run.out, split), &trajs)?;
    writeln!(log, "solve-ref: {} {} trajectories of {} snapshots", trajs.len(), split.name(), run.resolved.problem.total_steps() + 1).ok();
    run.provenance("solve-ref", serde_json::json!({ "split": split.name(), "warnings": warnings }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub sample: usize,
    pub total: f64,
    pub energy: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Residual of every stored reference trajectory. Fails with the
/// `residual-gate` code when any total exceeds `tol · (1 + Σ‖α^r‖²)`.
pub fn residual_check_cmd(run: &Run, split: Split, tol: f64, log: &mut dyn Write) -> Result<Vec<ResidualEntry>> {
    let p = &run.resolved.problem;
    let inputs = run.inputs(split)?;
    let trajs = dataset::read_trajectories(&dataset::refs_path(&run.out, split), p.representation())?;
    if trajs.len() != inputs.len() {
        return Err(CliError::format(format!("{} trajectories for {} inputs", trajs.len(), inputs.len())));
    }
    let mut entries = Vec::with_capacity(trajs.len());
    for (i, (t, s)) in trajs.iter().zip(&inputs).enumerate() {
        let report = residual_check(p, t, s)?;
        let energy = t.energy();
        let bound = tol * (1.0 + energy);
        let e = ResidualEntry { sample: i, total: report.total, energy, bound, pass: report.total <= bound };
        writeln!(log, "residual-check: sample {i} total {:.6e} bound {:.6e} {}", e.total, e.bound, if e.pass { "ok" } else { "FAIL" }).ok();
        entries.push(e);
    }
    let path = run.out.join(format!("residuals_{}.json", split.name()));
    std::fs::write(&path, serde_json::to_string_pretty(&entries).expect("report serializes"))
        .map_err(|e| CliError::io(&path, e))?;
    let failed = entries.iter().filter(|e| !e.pass).count();
    run.provenance("residual-check", serde_json::json!({ "split": split.name(), "tolerance": tol, "failed": failed }))?;
    if failed > 0 {
        return Err(CliError::new(
            Code::ResidualGate,
            format!("{failed} of {} trajectories exceed the residual bound", entries.len()),
        ));
    }
    Ok(entries)
}

/// Trains the remaining segments (at most `max_segments` of them in this
/// call), writing a checkpoint and a loss log after each one.
pub fn train(run: &Run, resume: bool, max_segments: Option<usize>, log: &mut dyn Write) -> Result<TrainState> {
    let r = &run.resolved;
    let inputs = run.inputs(Split::Train)?;
    let init = NetworkParams::init(r.arch.clone(), r.init_seed)?;
    let fresh = TrainState::new(&r.problem, init, &inputs, r.init_seed)?;
    let dir = checkpoint_dir(&run.out);
    let existing = checkpoint::count_segments(&dir);
    let mut state = if existing > 0 {
        if !resume {
            return Err(CliError::new(
                Code::Usage,
                format!("{} already holds {existing} checkpoints; pass --resume to continue", dir.display()),
            ));
        }
        checkpoint::resume_state(checkpoint::load_all(&dir, &run.hash)?, fresh)?
    } else {
        fresh
    };
    let mut budget = max_segments.unwrap_or(usize::MAX);
    while !state.is_finished(&r.problem) && budget > 0 {
        state = train_segment(&r.problem, state, &inputs, &r.optimizer)?;
        budget -= 1;
        let path = checkpoint::write_segment(&dir, &state, &run.hash)?;
        let rec = state.segments.last().expect("just trained");
        write_loss_log(&run.out.join(format!("loss_segment_{:03}.csv", state.segment)), &rec.history)?;
        writeln!(
            log,
            "train: segment {}/{} iterations {} stop {} loss {:.6e} -> {}",
            state.segment,
            r.problem.q,
            rec.iterations,
            rec.stop.name(),
            rec.history.last().copied().unwrap_or(f64::NAN),
            path.display()
        )
        .ok();
    }
    run.provenance(
        "train",
        serde_json::json!({ "segments_trained": state.segment, "resumed_from": existing, "p_train": inputs.len() }),
    )?;
    Ok(state)
}

fn write_loss_log(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(["iteration", "loss"]).map_err(|e| CliError::io(path, e))?;
    for (i, v) in history.iter().enumerate() {
        w.write_record([i.to_string(), format_float(*v)]).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Scores the trained segments on the test split and writes `results.csv`
/// (one row, table column order) and `results_per_instance.csv`.
pub fn eval(run: &Run, log: &mut dyn Write) -> Result<BenchmarkRow> {
    let p = &run.resolved.problem;
    let loaded = checkpoint::load_all(&checkpoint_dir(&run.out), &run.hash)?;
    if loaded.len() != p.q {
        return Err(CliError::format(format!("{} of {} segments are trained", loaded.len(), p.q)));
    }
    let template = loaded[0].params.clone();
    let segments: Vec<Vec<f64>> = loaded.into_iter().map(|s| s.params.flat).collect();
    let tests = run.inputs(Split::Test)?;
    let refs_file = dataset::refs_path(&run.out, Split::Test);
    let refs: Vec<Trajectory> = if refs_file.exists() {
        dataset::read_trajectories(&refs_file, p.representation())?
    } else {
        tests.iter().map(|s| solve(p, s)).collect::<sclon_core::Result<_>>()?
    };
    if refs.len() != tests.len() {
        return Err(CliError::format(format!("{} test references for {} test inputs", refs.len(), tests.len())));
    }
    let preds = tests.iter().map(|s| predict(p, &template, &segments, s)).collect::<sclon_core::Result<Vec<_>>>()?;
    let report = error_triple(&preds, &refs, &p.discretization()?)?;
    for i in &report.excluded {
        writeln!(log, "warning: test sample {i} has a zero reference and is left out of Rel.L2").ok();
    }
    let row = BenchmarkRow {
        equation: p.family.label().into(),
        random_input: p.family.input_kind().name().into(),
        method: if p.corrector { "BE-SCLON" } else { "SCLON" }.into(),
        report,
    };
    write_results(&run.out, &row)?;
    writeln!(log, "eval: {}", row.fields().join(",")).ok();
    run.provenance("eval", serde_json::json!({ "p_test": tests.len(), "excluded": row.report.excluded }))?;
    Ok(row)
}

fn write_results(dir: &Path, row: &BenchmarkRow) -> Result<()> {
    let path = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
    w.write_record(TABLE_COLUMNS).map_err(|e| CliError::io(&path, e))?;
    w.write_record(row.fields()).map_err(|e| CliError::io(&path, e))?;
    w.flush().map_err(|e| CliError::io(&path, e))?;
    write_per_instance(&dir.join("results_per_instance.csv"), &row.report)
}

fn write_per_instance(path: &Path, report: &ErrorReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(["sample", "mae", "rel_l2", "l_inf"]).map_err(|e| CliError::io(path, e))?;
    for (i, t) in report.per_instance.iter().enumerate() {
        w.write_record([i.to_string(), format_float(t.mae), format_float(t.rel_l2), format_float(t.l_inf)])
            .map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Flattens an ArrayFile to CSV: one row per index of all but the last
/// dimension, leading index columns, then the last dimension's values
/// (`re_j, im_j` pairs for complex arrays).
pub fn export_csv(input: &Path, output: &Path) -> Result<()> {
    let a = ArrayFile::read(input)?;
    let last = *a.dims.last().expect("rank >= 1");
    let lead = &a.dims[..a.dims.len() - 1];
    let mut w = csv::Writer::from_path(output).map_err(|e| CliError::io(output, e))?;
    let mut header: Vec<String> = (0..lead.len()).map(|i| format!("i{i}")).collect();
    for j in 0..last {
        match a.kind {
            ElementKind::F64 => header.push(format!("v{j}")),
            ElementKind::C128 => {
                header.push(format!("re{j}"));
                header.push(format!("im{j}"));
            }
        }
    }
    w.write_record(&header).map_err(|e| CliError::io(output, e))?;
    let row_len = last * a.kind.width();
    for (r, chunk) in a.data.chunks(row_len.max(1)).enumerate() {
        let mut rec = Vec::with_capacity(lead.len() + chunk.len());
        let mut rem = r;
        let mut idx = vec![0; lead.len()];
        for (k, d) in lead.iter().enumerate().rev() {
            idx[k] = rem % d;
            rem /= d;
        }
        rec.extend(idx.iter().map(usize::to_string));
        rec.extend(chunk.iter().map(|v| format_float(*v)));
        w.write_record(&rec).map_err(|e| CliError::io(output, e))?;
    }
    w.flush().map_err(|e| CliError::io(output, e))
}

use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use sclon::array::{ArrayFile, ElementKind};
use sclon::checkpoint;
use sclon::cli::main_with;

/// Runs the CLI in-process; returns (status, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sclon".to_string()).chain(args.iter().map(|s| s.to_string()));
    let status = main_with(argv, &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const TINY_BURGERS: &str = r#"
[problem]
family = "burgers"
n = 8
q = 2
r = 2

[sampling]
seed = 3
p_train = 2
p_test = 2

[network]
width = 2
depth = 1
kernel = 3
init_seed = 5

[optimizer]
max_iters = 15
"#;

fn assert_single_error_line(err: &str, code: &str) {
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "expected one line, got {err:?}");
    assert!(lines[0].starts_with(&format!("error: code={code} ")), "{}", lines[0]);
}

#[test]
fn gen_inputs_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = write_config(d.path(), "[problem]\nfamily = \"advection\"\n[sampling]\nseed = 11\np_train = 4\np_test = 3\n");
        let (status, _, err) = run(&["gen-inputs", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
        assert_eq!(status, 0, "{err}");
    }
    for f in ["inputs_train.scln", "inputs_test.scln", "inputs_train_aux.scln", "manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert!(a.path().join("provenance_gen-inputs.json").exists());
}

#[test]
fn solve_ref_then_residual_check_passes_for_burgers_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "[problem]\nfamily = \"burgers\"\n[sampling]\np_train = 1\np_test = 8\n");
    let out = d.path().to_str().unwrap();
    assert_eq!(run(&["gen-inputs", "--config", &cfg, "--out", out]).0, 0);
    assert_eq!(run(&["solve-ref", "--config", &cfg, "--out", out]).0, 0);
    let (status, stdout, err) = run(&["residual-check", "--config", &cfg, "--out", out]);
    assert_eq!(status, 0, "{err}");
    assert_eq!(stdout.lines().filter(|l| l.ends_with(" ok")).count(), 8);
    let refs = ArrayFile::read(&d.path().join("refs_test.scln")).unwrap();
    assert_eq!(refs.kind, ElementKind::C128);
    assert_eq!(refs.dims, vec![8, 101, 32]);
}

#[test]
fn residual_gate_fails_on_perturbed_trajectories() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "[problem]\nfamily = \"diffusion_reaction\"\nn = 8\nq = 1\nr = 3\n[sampling]\np_train = 1\np_test = 2\n");
    let out = d.path().to_str().unwrap();
    assert_eq!(run(&["gen-inputs", "--config", &cfg, "--out", out]).0, 0);
    assert_eq!(run(&["solve-ref", "--config", &cfg, "--out", out]).0, 0);
    let path = d.path().join("refs_test.scln");
    let mut a = ArrayFile::read(&path).unwrap();
    let last = a.data.len() - 1;
    a.data[last] += 1e-3;
    a.write(&path).unwrap();
    let (status, _, err) = run(&["residual-check", "--config", &cfg, "--out", out]);
    assert_eq!(status, 8);
    assert_single_error_line(&err, "residual-gate");
}

#[test]
fn bad_inputs_give_one_line_error_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();

    let cfg = write_config(d.path(), "[problem]\nfamily = \"burgers\"\nviscosity = 1.0\n");
    let (status, _, err) = run(&["gen-inputs", "--config", &cfg, "--out", out]);
    assert_eq!(status, 3);
    assert_single_error_line(&err, "config-invalid");

    let cfg = write_config(d.path(), "[problem]\nfamily = \"burgers\"\nt_final = 2.0\n");
    let (status, _, err) = run(&["gen-inputs", "--config", &cfg, "--out", out]);
    assert_eq!(status, 3);
    assert_single_error_line(&err, "config-invalid");

    let (status, _, err) = run(&["gen-inputs", "--config", &cfg, "--bogus"]);
    assert_eq!(status, 2);
    assert_single_error_line(&err, "usage");

    let missing = d.path().join("nope.toml");
    let (status, _, err) = run(&["gen-inputs", "--config", missing.to_str().unwrap()]);
    assert_eq!(status, 4);
    assert_single_error_line(&err, "io");

    let junk = d.path().join("junk.scln");
    std::fs::write(&junk, b"not an array").unwrap();
    let (status, _, err) = run(&["export-csv", junk.to_str().unwrap()]);
    assert_eq!(status, 5);
    assert_single_error_line(&err, "format");
}

#[test]
fn binary_reports_exit_status() {
    let out = Command::new(env!("CARGO_BIN_EXE_sclon")).args(["train", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_single_error_line(&err, "io");
}

#[test]
fn train_resume_and_eval() {
    let full = tempfile::tempdir().unwrap();
    let split = tempfile::tempdir().unwrap();
    for d in [&full, &split] {
        let cfg = write_config(d.path(), TINY_BURGERS);
        assert_eq!(run(&["gen-inputs", "--config", &cfg, "--out", d.path().to_str().unwrap()]).0, 0);
    }
    let cfg_full = full.path().join("run.toml").display().to_string();
    let cfg_split = split.path().join("run.toml").display().to_string();
    let (status, _, err) = run(&["train", "--config", &cfg_full, "--out", full.path().to_str().unwrap()]);
    assert_eq!(status, 0, "{err}");

    let sp = split.path().to_str().unwrap();
    assert_eq!(run(&["train", "--config", &cfg_split, "--out", sp, "--max-segments", "1"]).0, 0);
    // Training again without --resume would overwrite checkpoints.
    let (status, _, err) = run(&["train", "--config", &cfg_split, "--out", sp]);
    assert_eq!(status, 2);
    assert_single_error_line(&err, "usage");
    let (status, _, err) = run(&["train", "--config", &cfg_split, "--out", sp, "--resume"]);
    assert_eq!(status, 0, "{err}");

    let dir_a = checkpoint::checkpoint_dir(full.path());
    let dir_b = checkpoint::checkpoint_dir(split.path());
    for q in 1..=2 {
        let a = checkpoint::load_segment(&dir_a, q).unwrap();
        let b = checkpoint::load_segment(&dir_b, q).unwrap();
        assert_eq!(a.record.history.len(), b.record.history.len());
        for (x, y) in a.record.history.iter().zip(&b.record.history) {
            assert!((x - y).abs() <= 1e-10 * x.abs(), "segment {q}: {x} vs {y}");
        }
        assert_eq!(a.params.flat, b.params.flat);
    }

    let (status, stdout, err) = run(&["eval", "--config", &cfg_full, "--out", full.path().to_str().unwrap()]);
    assert_eq!(status, 0, "{err}");
    assert!(stdout.contains("eval: Burgers,initial_condition,SCLON,"));
    let csv = std::fs::read_to_string(full.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "equation,random_input,method,mae,rel_l2,l_inf");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    let mae: f64 = row[3].parse().unwrap();
    assert!(mae.is_finite() && mae >= 0.0);
    assert_eq!(row[3].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn tampered_config_hash_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let cfg = write_config(d.path(), TINY_BURGERS);
    assert_eq!(run(&["gen-inputs", "--config", &cfg, "--out", out]).0, 0);
    assert_eq!(run(&["train", "--config", &cfg, "--out", out, "--max-segments", "1"]).0, 0);

    let record = checkpoint::checkpoint_dir(d.path()).join("segment_001.json");
    let text = std::fs::read_to_string(&record).unwrap();
    let ck = checkpoint::read_record(&record).unwrap();
    std::fs::write(&record, text.replace(&ck.config_hash, &"0".repeat(64))).unwrap();
    let (status, _, err) = run(&["train", "--config", &cfg, "--out", out, "--resume"]);
    assert_eq!(status, 6);
    assert_single_error_line(&err, "config-mismatch");

    // A changed config is refused too.
    std::fs::write(&record, text).unwrap();
    let cfg = write_config(d.path(), &TINY_BURGERS.replace("max_iters = 15", "max_iters = 16"));
    let (status, _, err) = run(&["train", "--config", &cfg, "--out", out, "--resume"]);
    assert_eq!(status, 6);
    assert_single_error_line(&err, "config-mismatch");
}

#[test]
fn export_csv_flattens_rows() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("a.scln");
    ArrayFile::new(ElementKind::C128, vec![2, 1, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 0.1]).unwrap().write(&path).unwrap();
    let (status, _, err) = run(&["export-csv", path.to_str().unwrap()]);
    assert_eq!(status, 0, "{err}");
    let csv = std::fs::read_to_string(d.path().join("a.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "i0,i1,re0,im0,re1,im1");
    assert!(lines[2].starts_with("1,0,5.0000000000000000e0,"));
    let last: f64 = lines[2].split(',').last().unwrap().parse().unwrap();
    assert_eq!(last, 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn array_file_round_trips_bit_for_bit(
        dims in prop::collection::vec(1usize..5, 1..=4),
        complex in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let kind = if complex { ElementKind::C128 } else { ElementKind::F64 };
        let count = dims.iter().product::<usize>() * kind.width();
        // Arbitrary bit patterns, NaN payloads and signed zeros included.
        let data: Vec<f64> = (0..count as u64)
            .map(|i| f64::from_bits(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(i as u32 % 64) ^ i))
            .collect();
        let a = ArrayFile::new(kind, dims.clone(), data.clone()).unwrap();
        let bytes = a.to_bytes();
        prop_assert_eq!(bytes.len(), 64 + 8 * count);
        let b = ArrayFile::from_bytes(&bytes).unwrap();
        prop_assert_eq!(b.dims, dims);
        prop_assert_eq!(b.kind, kind);
        let same = b.data.iter().zip(&data).all(|(x, y)| x.to_bits() == y.to_bits());
        prop_assert!(same);
    }
}

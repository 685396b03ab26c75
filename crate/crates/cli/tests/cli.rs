//! End-to-end tests of the `tsad` binary: artifact contents, exit
//! codes, determinism, and the manifest contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsad"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawning tsad")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn synth_small_seeded(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let args = [
        "synth",
        "--out",
        name,
        "--rows",
        "400",
        "--anomaly-fraction",
        "0.05",
        "--anomaly-start-fraction",
        "0.75",
        "--event-len-min",
        "10",
        "--event-len-max",
        "20",
        "--seed",
        seed,
    ];
    assert_success(&run(&args, dir));
    dir.join(name)
}

fn synth_small(dir: &Path, name: &str) -> PathBuf {
    synth_small_seeded(dir, name, "9")
}

/// Tiny but complete training run: 400 rows, lookback 4, widths [2].
fn train_small(dir: &Path, out_dir: &str, extra: &[&str]) {
    let mut args = vec![
        "train",
        "--data",
        "data.csv",
        "--out-dir",
        out_dir,
        "--lookback",
        "4",
        "--widths",
        "2",
        "--epochs",
        "2",
        "--learning-rate",
        "0.005",
        "--seed",
        "3",
    ];
    args.extend_from_slice(extra);
    assert_success(&run(&args, dir));
}

fn manifest_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).expect("reading manifest");
    serde_json::from_str(&text).expect("parsing manifest")
}

#[test]
fn synth_is_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    let a = synth_small(tmp.path(), "a.csv");
    let b = synth_small(tmp.path(), "b.csv");
    let c = synth_small_seeded(tmp.path(), "c.csv", "10");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    // Missing required --out.
    let out = run(&["synth"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    // Unknown subcommand.
    let out = run(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    // Unparseable flag values are usage errors, not pipeline errors.
    let out = run(&["synth", "--out", "x.csv", "--kinds", "bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(
        &["detect", "--data", "d", "--model", "m", "--threshold", "quantile:1.5"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_1_and_name_the_stage() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    let out = run(
        &["detect", "--data", "data.csv", "--model", "missing.bin", "--out-dir", "r"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("loading model"),
        "stderr should name the failing stage: {stderr}"
    );
}

#[test]
fn train_writes_model_curves_and_manifest() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    train_small(tmp.path(), "run", &[]);
    for name in ["run/model.bin", "run/curves.csv", "run/train_manifest.json"] {
        assert!(tmp.path().join(name).exists(), "{name} missing");
    }
    let m = manifest_json(&tmp.path().join("run/train_manifest.json"));
    assert_eq!(m["command"], "train");
    assert_eq!(m["counts"]["total_rows"], 400);
    assert_eq!(m["counts"]["train_rows"], 280);
    assert_eq!(m["counts"]["epochs_run"], 2);
    // 280 clean train rows, lookback 4 -> 277 windows.
    assert_eq!(m["counts"]["train_windows"], 277);
    assert_eq!(m["inputs"][0]["path"], "data.csv");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn detect_honors_a_fixed_threshold_verbatim() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    train_small(tmp.path(), "run", &[]);
    assert_success(&run(
        &[
            "detect",
            "--data",
            "data.csv",
            "--model",
            "run/model.bin",
            "--out-dir",
            "run",
            "--threshold",
            "fixed:0.5",
        ],
        tmp.path(),
    ));
    let m = manifest_json(&tmp.path().join("run/detect_manifest.json"));
    assert_eq!(m["threshold"]["strategy"], "fixed:0.5");
    assert_eq!(m["threshold"]["value"], 0.5);

    // Flags in the report must satisfy flag = (loss > 0.5) exactly.
    let report = std::fs::read_to_string(tmp.path().join("run/report.csv")).unwrap();
    let mut rows = 0;
    for line in report.lines().skip(1) {
        let mut parts = line.split(',');
        let _end = parts.next().unwrap();
        let loss: f64 = parts.next().unwrap().parse().unwrap();
        let flag: u8 = parts.next().unwrap().parse().unwrap();
        assert_eq!(flag, u8::from(loss > 0.5));
        rows += 1;
    }
    // 120 test rows, lookback 4 -> 117 windows.
    assert_eq!(rows, 117);
}

#[test]
fn eval_writes_metrics_confusion_roc_and_plots() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    train_small(tmp.path(), "run", &[]);
    assert_success(&run(
        &["detect", "--data", "data.csv", "--model", "run/model.bin", "--out-dir", "run"],
        tmp.path(),
    ));
    assert_success(&run(
        &[
            "eval",
            "--report",
            "run/report.csv",
            "--data",
            "data.csv",
            "--out-dir",
            "run",
            "--plots",
        ],
        tmp.path(),
    ));
    for name in [
        "run/metrics.csv",
        "run/confusion.csv",
        "run/roc.csv",
        "run/loss_histogram.svg",
        "run/loss_scatter.svg",
        "run/roc.svg",
        "run/eval_manifest.json",
    ] {
        assert!(tmp.path().join(name).exists(), "{name} missing");
    }
    let m = manifest_json(&tmp.path().join("run/eval_manifest.json"));
    assert_eq!(m["counts"]["windows"], 117);
    assert!(m["counts"]["auc"].is_number());
    let svg = std::fs::read_to_string(tmp.path().join("run/roc.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn eval_on_single_class_truth_warns_and_skips_roc() {
    let tmp = TempDir::new().unwrap();
    // No anomalies at all: the test portion is single-class.
    assert_success(&run(
        &["synth", "--out", "data.csv", "--rows", "400", "--anomaly-fraction", "0", "--seed", "9"],
        tmp.path(),
    ));
    train_small(tmp.path(), "run", &[]);
    assert_success(&run(
        &["detect", "--data", "data.csv", "--model", "run/model.bin", "--out-dir", "run"],
        tmp.path(),
    ));
    let out = run(
        &["eval", "--report", "run/report.csv", "--data", "data.csv", "--out-dir", "run"],
        tmp.path(),
    );
    assert_success(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("single class"), "stderr: {stderr}");
    assert!(tmp.path().join("run/metrics.csv").exists());
    assert!(!tmp.path().join("run/roc.csv").exists());
    let m = manifest_json(&tmp.path().join("run/eval_manifest.json"));
    assert!(m["counts"]["auc"].is_null());
}

#[test]
fn compare_reports_zero_delta_against_itself() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    train_small(tmp.path(), "run", &[]);
    assert_success(&run(
        &["detect", "--data", "data.csv", "--model", "run/model.bin", "--out-dir", "run"],
        tmp.path(),
    ));
    let out = run(
        &[
            "compare",
            "--report-a",
            "run/report.csv",
            "--report-b",
            "run/report.csv",
            "--data",
            "data.csv",
            "--out-dir",
            "run",
            "--name-a",
            "left",
            "--name-b",
            "right",
        ],
        tmp.path(),
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("left") && stdout.contains("right"));
    assert!(stdout.contains("delta"));
    let csv = std::fs::read_to_string(tmp.path().join("run/comparison.csv")).unwrap();
    let delta_line = csv.lines().find(|l| l.starts_with("delta,")).unwrap();
    assert_eq!(delta_line, "delta,0,0,0,0,0");
}

#[test]
fn out_dir_env_var_is_a_default_not_an_override() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    // With the env var set and no --out-dir, artifacts land in its dir.
    let out = bin()
        .args(["train", "--data", "data.csv", "--lookback", "4", "--widths", "2", "--epochs", "1", "--learning-rate", "0.005"])
        .env("TSAD_OUT_DIR", "from_env")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_success(&out);
    assert!(tmp.path().join("from_env/model.bin").exists());
    // An explicit --out-dir wins over the env var.
    let out = bin()
        .args([
            "train", "--data", "data.csv", "--out-dir", "explicit", "--lookback", "4",
            "--widths", "2", "--epochs", "1", "--learning-rate", "0.005",
        ])
        .env("TSAD_OUT_DIR", "from_env")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_success(&out);
    assert!(tmp.path().join("explicit/model.bin").exists());
}

#[test]
fn threaded_scoring_matches_single_threaded_bytes() {
    let tmp = TempDir::new().unwrap();
    synth_small(tmp.path(), "data.csv");
    train_small(tmp.path(), "run", &[]);
    assert_success(&run(
        &["detect", "--data", "data.csv", "--model", "run/model.bin", "--out-dir", "one"],
        tmp.path(),
    ));
    assert_success(&run(
        &[
            "detect", "--data", "data.csv", "--model", "run/model.bin", "--out-dir", "three",
            "--threads", "3",
        ],
        tmp.path(),
    ));
    // Per-window losses are independent of the scoring fan-out.
    assert_eq!(
        std::fs::read(tmp.path().join("one/report.csv")).unwrap(),
        std::fs::read(tmp.path().join("three/report.csv")).unwrap()
    );
}

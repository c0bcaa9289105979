//! End-to-end checks of the `augclust` binary: exit codes, output-directory
//! resolution, and byte-level determinism of the persisted results.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_augclust");
const OUTPUT_DIR_ENV: &str = "AUGCLUST_OUTPUT_DIR";

/// Three cells of the quadratic-grid experiment; runs in milliseconds.
const FAST_CONFIG: &str = r#"
experiment = "rate_check"
seeds = [7]
output_dir = "results"
sweep = [0.0, 13.0, 26.0]
"#;

fn run_args(args: &[&str], cwd: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).current_dir(cwd).env_remove(OUTPUT_DIR_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary should spawn")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn reruns_are_byte_identical_across_output_dirs() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), FAST_CONFIG);

    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = run_args(
            &["run", "--config", &config, "--output-dir", dir.to_str().unwrap()],
            tmp.path(),
            &[],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    for file in ["results.csv", "manifest.json"] {
        let left = fs::read(a.join(file)).unwrap();
        let right = fs::read(b.join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between reruns");
    }
}

#[test]
fn output_dir_resolution_prefers_flag_over_env_over_config() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), FAST_CONFIG);

    let out = run_args(&["run", "--config", &config], tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("results/results.csv").is_file());

    let env_dir = tmp.path().join("from_env");
    let out = run_args(
        &["run", "--config", &config],
        tmp.path(),
        &[(OUTPUT_DIR_ENV, env_dir.to_str().unwrap())],
    );
    assert!(out.status.success());
    assert!(env_dir.join("results.csv").is_file());

    let flag_dir = tmp.path().join("from_flag");
    let out = run_args(
        &["run", "--config", &config, "--output-dir", flag_dir.to_str().unwrap()],
        tmp.path(),
        &[(OUTPUT_DIR_ENV, env_dir.to_str().unwrap())],
    );
    assert!(out.status.success());
    assert!(flag_dir.join("results.csv").is_file());
}

#[test]
fn gen_data_is_deterministic_and_labelled() {
    let tmp = TempDir::new().unwrap();
    let out_a = tmp.path().join("a.csv");
    let out_b = tmp.path().join("b.csv");

    for out in [&out_a, &out_b] {
        let run = run_args(
            &[
                "gen-data",
                "--n-per-cluster",
                "5",
                "--seed",
                "3",
                "--out",
                out.to_str().unwrap(),
            ],
            tmp.path(),
            &[],
        );
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }

    let text = fs::read_to_string(&out_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1,label"));
    assert_eq!(lines.count(), 20);
    assert_eq!(text, fs::read_to_string(&out_b).unwrap());
}

#[test]
fn failing_rows_produce_a_nonzero_exit_and_persisted_results() {
    // Data-point candidate sets are near-collinear, so under noise the two
    // arms land measurably apart and the row fails its agreement bound.
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
experiment = "unchanged_optima"
seeds = [1]
sweep = [4.0]

[objective]
loss = "soft_min"
candidates_per_cluster = 3

[optimizer]
eta = 0.01
"#,
    );

    let dir = tmp.path().join("out");
    let out = run_args(
        &["run", "--config", &config, "--output-dir", dir.to_str().unwrap()],
        tmp.path(),
        &[],
    );
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1 failed"), "unexpected stdout: {stdout}");
    let csv = fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",false,")), "no failing row in: {csv}");
}

#[test]
fn missing_config_file_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let out = run_args(&["run", "--config", "no_such.toml"], tmp.path(), &[]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such.toml"), "unexpected stderr: {stderr}");
}

#[test]
fn invalid_config_values_are_rejected_before_running() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "experiment = \"noise_sweep\"\n\n[optimizer]\neta = 0.0\n",
    );
    let out = run_args(&["run", "--config", &config], tmp.path(), &[]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("optimizer.eta"), "unexpected stderr: {stderr}");
}

#[test]
fn unknown_experiment_kind_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "experiment = \"frobnicate\"\n");
    let out = run_args(&["run", "--config", &config], tmp.path(), &[]);
    assert!(!out.status.success());
}

//! End-to-end checks of the binary: exit codes, reproducibility,
//! config merging, and the verification suite's sensitivity hook.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fppsim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn fppsim")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("fppsim_cli_{name}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn constants_prints_lambda_and_density() {
    let out = run(&["constants", "--s", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lambda=0.785398163397"));
    assert!(text.contains("t,density"));
}

#[test]
fn invalid_disorder_is_a_usage_error() {
    assert_eq!(code(&run(&["constants", "--s", "0"])), 1);
    assert_eq!(code(&run(&["constants", "--s", "-1"])), 1);
    assert_eq!(code(&run(&["constants"])), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["fpp", "--bogus", "1"])), 1);
}

#[test]
fn fpp_requires_a_seed() {
    assert_eq!(code(&run(&["fpp", "--s", "1", "--n", "100"])), 1);
}

#[test]
fn fpp_n2_has_unit_hopcount_and_replays_byte_identically() {
    let csv = tmp("fpp_n2.csv");
    let args = [
        "fpp", "--s", "1", "--n", "2", "--replicates", "100",
        "--seed", "42", "--out", csv.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    let text1 = std::fs::read_to_string(&csv).unwrap();
    for line in text1.lines().skip(1) {
        let hops: u32 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert_eq!(hops, 1);
    }
    let second = run(&args);
    assert_eq!(code(&second), 0);
    assert_eq!(text1, std::fs::read_to_string(&csv).unwrap());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn fpp_output_is_invariant_under_jobs() {
    let csv1 = tmp("fpp_j1.csv");
    let csv8 = tmp("fpp_j8.csv");
    let base = ["fpp", "--s", "1", "--n", "200", "--replicates", "64", "--seed", "7"];
    let out1 = run(&[&base[..], &["--jobs", "1", "--out", csv1.to_str().unwrap()]].concat());
    let out8 = run(&[&base[..], &["--jobs", "8", "--out", csv8.to_str().unwrap()]].concat());
    assert_eq!(code(&out1), 0);
    assert_eq!(code(&out8), 0);
    assert_eq!(
        std::fs::read(&csv1).unwrap(),
        std::fs::read(&csv8).unwrap()
    );
    assert_eq!(out1.stdout, out8.stdout);
}

#[test]
fn config_file_matches_equivalent_flags() {
    let csv_flags = tmp("cfg_flags.csv");
    let csv_file = tmp("cfg_file.csv");
    let config = tmp("run.toml");
    std::fs::write(
        &config,
        format!(
            "s = 1.0\nn = 150\nreplicates = 40\nseed = 99\nout = \"{}\"\n",
            csv_file.display()
        ),
    )
    .unwrap();
    let by_flags = run(&[
        "fpp", "--s", "1", "--n", "150", "--replicates", "40",
        "--seed", "99", "--out", csv_flags.to_str().unwrap(),
    ]);
    let by_file = run(&["fpp", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&by_flags), 0);
    assert_eq!(code(&by_file), 0);
    assert_eq!(by_flags.stdout, by_file.stdout);
    assert_eq!(
        std::fs::read(&csv_flags).unwrap(),
        std::fs::read(&csv_file).unwrap()
    );
    // A flag overrides the file value.
    let overridden = run(&[
        "fpp", "--config", config.to_str().unwrap(),
        "--seed", "100", "--out", csv_flags.to_str().unwrap(),
    ]);
    assert_eq!(code(&overridden), 0);
    assert_ne!(by_flags.stdout, overridden.stdout);
}

#[test]
fn config_with_unknown_keys_is_rejected() {
    let config = tmp("bad.toml");
    std::fs::write(&config, "bogus = 1\n").unwrap();
    let out = run(&["fpp", "--config", config.to_str().unwrap(), "--seed", "1"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn single_emits_csv_rows() {
    let csv = tmp("single.csv");
    let out = run(&[
        "single", "--s", "1", "--n", "50", "--replicates", "20",
        "--seed", "3", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("replicate,cost,hopcount,explored,activation_diag"));
    assert_eq!(text.lines().count(), 21);
    assert_eq!(code(&run(&["single", "--s", "1", "--n", "50", "--seed", "3", "--target", "0"])), 1);
}

#[test]
fn ctbp_emits_a_snapshot() {
    let csv = tmp("ctbp.csv");
    let out = run(&[
        "ctbp", "--s", "1", "--horizon", "5000", "--seed", "8",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("id,parent,birth_time,generation"));
    assert!(text.lines().count() > 100);
}

#[test]
fn limit_emits_sample_files() {
    let prefix = tmp("lim");
    let out = run(&[
        "limit", "--s", "1", "--seed", "13", "--replicates", "200",
        "--horizon", "5000", "--out", prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for suffix in ["w", "xi2", "phi"] {
        let path = format!("{}_{suffix}.csv", prefix.display());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().count() > 100, "{path} too short");
    }
}

#[test]
fn oracle_compare_passes_on_a_small_graph() {
    let out = run(&[
        "oracle-compare", "--s", "1", "--n", "10",
        "--replicates", "2000", "--seed", "11",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}

#[test]
fn verify_single_criterion_reports_json() {
    let json_path = tmp("verify1.json");
    let out = run(&[
        "verify", "quick", "--criterion", "1",
        "--out", json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("criterion  1"));
    assert!(stderr.contains("PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["criteria"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_rejects_unknown_suite_and_criterion() {
    assert_eq!(code(&run(&["verify", "slow"])), 1);
    assert_eq!(code(&run(&["verify", "quick", "--criterion", "99"])), 1);
}

// The sensitivity hook: the two-vertex criterion must fail when the
// Malthusian rate it compares against is off by 5%.
#[test]
fn verify_two_vertex_detects_a_perturbed_rate() {
    let honest = run(&["verify", "quick", "--criterion", "11"]);
    assert_eq!(code(&honest), 0);
    let perturbed = bin()
        .args(["verify", "quick", "--criterion", "11"])
        .env("FPPSIM_LAMBDA_SCALE", "1.05")
        .output()
        .expect("spawn fppsim");
    assert_eq!(code(&perturbed), 3);
    let stderr = String::from_utf8(perturbed.stderr).unwrap();
    assert!(stderr.contains("FAIL"));
}

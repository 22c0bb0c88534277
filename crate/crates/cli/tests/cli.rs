use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fedsubmax_cli::{load_config, run_brute, run_experiment, RunOptions};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedsubmax"))
}

fn lines(bytes: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn run_bytes(config: &str) -> Vec<u8> {
    let cfg = load_config(&configs().join(config)).unwrap();
    let mut out = Vec::new();
    run_experiment(&cfg, &mut out, RunOptions::default()).unwrap();
    out
}

#[test]
fn cov3_fedcg_summary_has_the_headline_numbers() {
    let records = lines(&run_bytes("cov3-fedcg.json"));
    let summary = records.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(records.iter().filter(|r| r["record"] == "summary").count(), 1);
    assert_eq!(records.len(), 201);
    for key in ["Fhat", "F_rounded", "OPT", "slack"] {
        assert!(summary[key].is_number(), "{key} missing from {summary}");
    }
    assert_eq!(summary["OPT"], 0.75);
    assert_eq!(summary["bound_holds"], true);
    // 200 rounds · 2 clients · r = 2 · ⌈log₂ 3⌉ = 2 bits
    assert_eq!(summary["uplink_bits"], 200 * 2 * 2 * 2);
}

#[test]
fn brute_on_cov3_is_three_quarters() {
    let cfg = load_config(&configs().join("cov3-fedcg.json")).unwrap();
    let mut out = Vec::new();
    let s = run_brute(&cfg, &mut out).unwrap();
    assert_eq!(s.opt, Some(0.75));
    assert_eq!(s.set, vec![0, 1]);
    let inline = run_bytes("cov3-brute.json");
    assert_eq!(lines(&inline)[0]["OPT"], 0.75);
}

#[test]
fn runs_are_byte_identical() {
    for config in ["cov3-fedcg.json", "facility-fedcg-plus.json", "synthetic-discrete.json"] {
        assert_eq!(run_bytes(config), run_bytes(config), "{config}");
    }
}

#[test]
fn local_step_uplink_is_dense() {
    let records = lines(&run_bytes("facility-fedcg-plus.json"));
    let summary = records.last().unwrap();
    // 60/5 rounds · 2 clients · 4 coordinates · 64 bits
    assert_eq!(summary["uplink_bits"], 12 * 2 * 4 * 64);
    assert!(records[..records.len() - 1]
        .iter()
        .all(|r| r["max_drift"].as_f64().unwrap() <= 2f64.sqrt() + 1e-12));
}

#[test]
fn large_ground_sets_estimate_the_value_and_skip_opt() {
    let records = lines(&run_bytes("synthetic-large.json"));
    let summary = records.last().unwrap();
    assert_eq!(summary["fhat_estimated"], true);
    assert!(summary.get("OPT").is_none());
    assert_eq!(summary["uplink_bits"], 7200);
}

fn run_cli(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("FEDSUBMAX_THREADS", t),
        None => cmd.env_remove("FEDSUBMAX_THREADS"),
    };
    cmd.output().unwrap()
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("facility-fedcg-plus.json");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}.jsonl"));
        let res = run_cli(
            &["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            Some(threads),
        );
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_flag_overrides_the_config() {
    let cfg = configs().join("synthetic-discrete.json");
    let a = run_cli(&["run", "--config", cfg.to_str().unwrap(), "--seed", "5"], None);
    let b = run_cli(&["run", "--config", cfg.to_str().unwrap(), "--seed", "5"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(lines(&a.stdout).last().unwrap()["seed"], 5);
}

#[test]
fn validate_reports_the_instance() {
    let cfg = configs().join("cov3-fedcg.json");
    let res = run_cli(&["validate", "--config", cfg.to_str().unwrap()], None);
    assert!(res.status.success());
    let rec = &lines(&res.stdout)[0];
    assert_eq!((rec["n"].as_u64(), rec["clients"].as_u64(), rec["rank"].as_u64()), (Some(3), Some(4), Some(2)));
}

fn error_record(res: &Output) -> Value {
    assert!(!res.status.success());
    serde_json::from_slice(&res.stderr).unwrap()
}

#[test]
fn failures_exit_nonzero_with_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let rec = error_record(&run_cli(&["run", "--config", missing.to_str().unwrap()], None));
    assert_eq!(rec["kind"], "io");
    assert!(rec["path"].as_str().unwrap().ends_with("absent.json"));

    let bad_tau = dir.path().join("tau.json");
    fs::write(
        &bad_tau,
        r#"{"objective": {"kind": "coverage", "groups": [[0], [1]]},
            "matroid": {"kind": "uniform", "k": 1},
            "algorithm": {"name": "fedcg-plus", "rounds": 10, "tau": 3, "sigma": 0.2, "delta": 0.1}}"#,
    )
    .unwrap();
    let rec = error_record(&run_cli(&["run", "--config", bad_tau.to_str().unwrap()], None));
    assert_eq!(rec["kind"], "validation");
    assert_eq!(rec["field"], "algorithm.tau");

    let bad_data = dir.path().join("data.json");
    fs::write(
        &bad_data,
        r#"{"objective": {"kind": "facility", "path": "nowhere.csv"},
            "matroid": {"kind": "uniform", "k": 1},
            "algorithm": {"name": "brute"}}"#,
    )
    .unwrap();
    let rec = error_record(&run_cli(&["validate", "--config", bad_data.to_str().unwrap()], None));
    assert_eq!(rec["kind"], "io");
    assert!(rec["path"].as_str().unwrap().ends_with("nowhere.csv"));

    let cov = configs().join("cov3-fedcg.json");
    let rec = error_record(&run_cli(&["run", "--config", cov.to_str().unwrap()], Some("zero")));
    assert_eq!(rec["field"], "FEDSUBMAX_THREADS");
}

#[test]
fn matroid_errors_name_the_matroid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    fs::write(
        &cfg,
        r#"{"objective": {"kind": "coverage", "groups": [[0], [1], [2]]},
            "matroid": {"kind": "partition", "blocks": [[0, 1]], "caps": [1]},
            "algorithm": {"name": "central-greedy"}}"#,
    )
    .unwrap();
    let rec = error_record(&run_cli(&["run", "--config", cfg.to_str().unwrap()], None));
    assert_eq!(rec["kind"], "validation");
    assert!(rec["field"].as_str().unwrap().starts_with("matroid"));
}

use std::fs;
use std::process::Command;

use cascademf::cascade::{read_dump, sample_tree, write_dump};
use cascademf::runner::check_report_json;
use cascademf::weights::presets;

fn cascademf() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cascademf"));
    c.env("CASCADEMF_THREADS", "1");
    c
}

#[test]
fn validate_exit_codes() {
    let ok = cascademf().args(["validate", "--model", "bell"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("case"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = cascademf().args(["validate", "--model"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = cascademf().args(["validate", "--model", "no-such-preset"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tau_prints_csv_with_header() {
    let out = cascademf()
        .args(["tau", "--model", "binomial", "--q-start", "-1", "--q-stop", "1", "--q-step", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("q,"));
    assert_eq!(lines.len(), 6);
    let q1: Vec<f64> = lines[5].split(',').take(2).map(|s| s.parse().unwrap()).collect();
    assert_eq!(q1[0], 1.0);
    assert!(q1[1].abs() < 1e-12);
}

#[test]
fn simulate_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("tree.bin");
    let csv = dir.path().join("f.csv");
    let out = cascademf()
        .args(["simulate", "--model", "bell", "--depth", "6", "--seed", "9", "--out"])
        .arg(&dump)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = presets::beta_bell();
    let back = read_dump(&mut fs::File::open(&dump).unwrap(), &model).unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_dump(&back, &mut a).unwrap();
    write_dump(&sample_tree(&model, 6, 9).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, fs::read(&dump).unwrap());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + (1 << 6) + 1);
}

#[test]
fn experiment_writes_report_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"scenario": "bell", "depth": 9, "replicas": 4, "seed": 1}"#).unwrap();
    let out = cascademf()
        .args(["experiment", "--config"])
        .arg(&config)
        .args(["--seed", "3", "--threshold", "10", "--out"])
        .arg(dir.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("runs/bell-seed3-0");
    let report = fs::read_to_string(run.join("report.json")).unwrap();
    check_report_json(&report).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["provenance"]["seed"], 3);
    assert_eq!(v["provenance"]["depth"], 9);
    assert!(run.join("manifest.json").is_file());
    assert!(run.join("tau_F_m1.csv").is_file());

    let out = cascademf()
        .args(["experiment", "--config"])
        .arg(&config)
        .args(["--threshold", "0", "--out"])
        .arg(dir.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn experiment_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"scenario": "bell", "depht": 9}"#).unwrap();
    let out = cascademf().args(["experiment", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

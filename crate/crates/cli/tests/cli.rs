use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kmv(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmv"))
        .env("KMV_CACHE_DIR", cache)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bernoulli_37_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "bernoulli", "-p", "37"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "kmv/1");
    assert_eq!(v["r"], 1);
    assert_eq!(v["indices"], serde_json::json!([32]));
}

#[test]
fn json_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--json", "--no-cache", "vplus", "-p", "37", "-n", "1"];
    let a = kmv(dir.path(), &args);
    let b = kmv(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cache_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--json", "vplus", "-p", "37", "-n", "1"];
    let fresh = kmv(dir.path(), &args);
    assert_eq!(fresh.status.code(), Some(0));
    let stored: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(stored.len(), 1);
    let again = kmv(dir.path(), &args);
    assert_eq!(fresh.stdout, again.stdout);
    let uncached = kmv(dir.path(), &["--json", "--no-cache", "vplus", "-p", "37", "-n", "1"]);
    assert_eq!(fresh.stdout, uncached.stdout);
}

#[test]
fn unsaturated_results_are_not_cached() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "vplus", "-p", "37", "-n", "2", "--budget-secs", "0.001"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["saturated"], false);
    assert!(std::fs::read_dir(dir.path()).map(|d| d.count() == 0).unwrap_or(true));
}

#[test]
fn missed_places_for_37() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "missed", "-p", "37", "--level", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["missed"], serde_json::json!({"0": [32]}));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["bernoulli", "-p", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unsupported_scale_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["vplus", "-p", "101", "-n", "9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_norms_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "verify", "--suite", "norms", "-p", "3", "--seed", "7", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn csv_and_table_render() {
    let dir = tempfile::tempdir().unwrap();
    let csv = kmv(dir.path(), &["--csv", "bernoulli", "-p", "59"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("indices,44\n"));
    let table = kmv(dir.path(), &["bernoulli", "-p", "59"]);
    assert!(String::from_utf8(table.stdout).unwrap().contains("irregular indices  44"));
}

#[test]
fn eta_unit_depth() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "unit", "-p", "7", "-n", "2", "--eta", "2,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["depth"], 42);
    assert_eq!(v["real"], true);
    let bad = kmv(dir.path(), &["unit", "-p", "7", "-n", "2", "--eta", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn norm_of_zeta_is_x() {
    let dir = tempfile::tempdir().unwrap();
    let out = kmv(dir.path(), &["--json", "norm", "-p", "3", "-k", "0", "-l", "2", "--coeffs", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let coeffs = json(&out)["norm"]["coeffs"].as_array().unwrap().clone();
    assert_eq!(coeffs[1], "1");
    assert!(coeffs.iter().enumerate().all(|(i, c)| i == 1 || c == "0"));
}

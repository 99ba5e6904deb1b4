use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use weighted_tv::distributions::GaussianMixture;

fn wtv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtv")).args(args).output().expect("binary runs")
}

fn write_normal(dir: &Path, name: &str, mean: f64, variance: f64) -> String {
    let path = dir.join(name);
    fs::write(&path, GaussianMixture::normal(mean, variance).unwrap().to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn dist_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_normal(dir.path(), "a.json", 0.0, 1.0);
    let b = write_normal(dir.path(), "b.json", 0.25, 1.0);
    let out = wtv(&["dist", "--a", &a, "--b", &b, "--metric", "wq"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn certify_reports_satisfied_bound() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_normal(dir.path(), "a.json", 0.0, 1.0);
    let b = write_normal(dir.path(), "b.json", 0.01, 1.0);
    for regime in ["lemma1", "lemma2", "pointwise"] {
        let out = wtv(&["certify", "--a", &a, "--b", &b, "--regime", regime]);
        assert!(out.status.success(), "{regime}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["satisfied"], Value::Bool(true));
        assert!(v["lhs"].as_f64().unwrap() <= v["rhs"].as_f64().unwrap());
    }
}

#[test]
fn bad_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_normal(dir.path(), "a.json", 0.0, 1.0);
    let out = wtv(&["certify", "--a", &a, "--b", &a, "--q", "1", "--regime", "lemma1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = wtv(&["dist", "--a", &a, "--b", "/nonexistent/b.json", "--metric", "tv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn envelope_table_is_finite() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_normal(dir.path(), "a.json", 0.0, 1.0);
    for side in ["density", "frequency"] {
        let out = wtv(&["envelope", "--input", &a, "--side", side, "--K", "2", "--L", "3", "--n", "1024"]);
        assert!(out.status.success(), "{side}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(!text.contains("null") && !text.contains("inf"));
    }
}

#[test]
fn sweep_preset_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = wtv(&["sweep", "--preset", "gaussian-translate", "--out", out_dir.to_str().unwrap(), "--formats", "csv,json,svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("gaussian-translate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(out_dir.join("gaussian-translate.json").exists());
    assert!(out_dir.join("gaussian-translate.svg").exists());
}

#[test]
fn unknown_preset_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = wtv(&["sweep", "--preset", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn cwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwave")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn run(dir: &Path, value: Value) -> (Output, PathBuf) {
    let out = dir.join("out");
    let cfg = write_config(dir, &value);
    let o = cwave(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    (o, out)
}

/// Rows of `checks.csv` as (id, status, value).
fn checks(out: &Path) -> Vec<(String, String, f64)> {
    let text = fs::read_to_string(out.join("checks.csv")).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (id, status, value) = (col("check"), col("status"), col("value"));
    r.records().map(|rec| {
        let rec = rec.unwrap();
        (rec[id].to_string(), rec[status].to_string(), rec[value].parse().unwrap_or(f64::NAN))
    }).collect()
}

fn row<'a>(rows: &'a [(String, String, f64)], id: &str) -> &'a (String, String, f64) {
    rows.iter().find(|r| r.0 == id).unwrap_or_else(|| panic!("no row {id} in {rows:?}"))
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn ordering_violation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), json!({"kind": "profile", "wave": {"u_minus": -2.0, "u_plus": 0.9}}));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("composite-wave ordering u_- < 0 < u_* < u_m <= u_+"), "{err}");
    assert!(!out.exists(), "nothing is written for an invalid configuration");
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), json!({"kind": "profile", "grid": {"cells": 10}}));
    assert_eq!(o.status.code(), Some(2));
    let o = cwave(&["--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = cwave(&["--kind", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rarefaction_kinds_need_a_rarefaction() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), json!({"kind": "interactions", "wave": {"u_plus": 1.0}}));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs a rarefaction"));
}

#[test]
fn help_exits_cleanly() {
    let o = cwave(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--config"));
}

#[test]
fn weight_algebra_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), json!({"kind": "weight_algebra"}));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = checks(&out);
    let (_, status, min_sum) = row(&rows, "weight_h_sum_lower_bound");
    assert_eq!(status, "PASS");
    assert!(*min_sum > 2.0);
    assert_eq!(manifest(&out)["status"], "pass");
}

#[test]
fn poincare_linear_case_is_one_twelfth() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), json!({"kind": "poincare", "poincare": {"trials": 50}}));
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("poincare.csv")).unwrap();
    let line = text.lines().find(|l| l.starts_with("y,")).unwrap();
    let fields: Vec<f64> = line.split(',').skip(1).take(2).map(|v| v.parse().unwrap()).collect();
    assert!((fields[0] - 1.0 / 12.0).abs() < 1e-6 && (fields[1] - 1.0 / 12.0).abs() < 1e-6, "{line}");
    assert!(checks(&out).iter().all(|r| r.1 == "PASS"));
}

#[test]
fn steady_shock_stays_within_grid_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(
        dir.path(),
        json!({
            "kind": "evolve",
            "wave": {"u_plus": 1.0},
            "grid": {"xi_min": -30.0, "xi_max": 60.0, "n": 900},
            "scheme": {"end_time": 1.0, "output_interval": 0.25},
            "perturbation": {"family": "zero"}
        }),
    );
    assert_ne!(o.status.code(), Some(2));
    assert_ne!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = checks(&out);
    let (_, status, sup) = row(&rows, "evolve_convergence_trend");
    assert_eq!(status, "PASS");
    assert!(*sup < 10.0 * 0.1 * 0.1);
    for f in ["diagnostics.csv", "convergence.csv", "shift.csv", "energy.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_are_deterministic_and_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"kind": "profile", "profile": {"samples": 200}});
    let (a, out_a) = run(&dir.path().join("a"), {
        fs::create_dir_all(dir.path().join("a")).unwrap();
        cfg.clone()
    });
    fs::create_dir_all(dir.path().join("b")).unwrap();
    let (b, out_b) = run(&dir.path().join("b"), cfg);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let m = manifest(&out_a);
    let hash = m["manifest_sha256"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(manifest(&out_b)["manifest_sha256"], hash);
    let files = m["files"].as_array().unwrap();
    assert!(files.len() >= 4);
    for f in files {
        let name = f["name"].as_str().unwrap();
        let bytes_a = fs::read(out_a.join(name)).unwrap();
        assert_eq!(bytes_a, fs::read(out_b.join(name)).unwrap(), "{name} differs between runs");
        assert!(String::from_utf8_lossy(&bytes_a).contains(&format!("manifest_sha256={hash}")), "{name} lacks the hash");
    }
    assert_eq!(m["config"]["kind"], "profile");
}

#[test]
fn seed_flag_changes_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(cwave(&["--kind", "poincare", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(cwave(&["--kind", "poincare", "--seed", "7", "--out", b.to_str().unwrap()]).status.code(), Some(0));
    assert_ne!(manifest(&a)["manifest_sha256"], manifest(&b)["manifest_sha256"]);
    assert_eq!(manifest(&b)["config"]["seed"], 7);
}

#[test]
fn exhausted_budget_skips_and_pure_shock_marks_rarefaction_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), json!({"kind": "theorem_suite", "wave": {"u_plus": 1.0}, "budget_seconds": 1e-9}));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = checks(&out);
    assert!(rows.len() >= 12);
    assert!(rows.iter().filter(|r| r.0.starts_with("rarefaction_") || r.0.starts_with("interaction_")).all(|r| r.1 == "NOT_APPLICABLE"));
    assert!(rows.iter().any(|r| r.1 == "SKIPPED"));
    assert!(rows.iter().all(|r| r.1 == "SKIPPED" || r.1 == "NOT_APPLICABLE"));
}

#[test]
fn library_entry_point_reports_config_errors() {
    use cwave_cli::config::ExperimentConfig;
    use cwave_cli::{run_experiment, Outcome};
    let mut cfg = ExperimentConfig::default();
    cfg.wave.mu = -1.0;
    let s = run_experiment(&cfg);
    assert_eq!(s.outcome, Outcome::ConfigError);
    assert_eq!(s.failure.unwrap().class, "config");
    assert!(s.hash.is_none());
}

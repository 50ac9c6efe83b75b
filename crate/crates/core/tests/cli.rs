//! The `invmetric` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

fn zoo(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("zoo").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invmetric")).args(args).env_remove("INVMETRIC_DOMAIN").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn polydisc_metric_at_origin_is_one() {
    let o = run(&["--domain", &zoo("polydisc2.json"), "metric", "--at", "[0,0]", "--dir", "[1,1]"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.0");
}

#[test]
fn half_plane_distance_is_half_log_two() {
    let o = run(&["--domain", &zoo("upper_halfplane.json"), "distance", "--from", "[[0,1]]", "--to", "[[0,2]]"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.5 * 2f64.ln()).abs() < 1e-15);
    let o = run(&["--convention", "paper", "--domain", &zoo("upper_halfplane.json"), "distance", "--from", "[[0,1]]", "--to", "[[0,2]]"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn polyhedron_metric_prints_a_bracket() {
    let o = run(&["--domain", &zoo("three_face.json"), "metric", "--at", "[0.1,0.2]", "--dir", "[1,0]"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let ends: Vec<f64> = inner.split(',').map(|t| t.trim().parse().unwrap()).collect();
    assert_eq!(ends.len(), 2);
    assert!(0.0 < ends[0] && ends[0] <= ends[1]);
}

#[test]
fn missing_domain_file_is_a_spec_error() {
    let o = run(&["--domain", "/nonexistent/domain.json", "metric", "--at", "[0]", "--dir", "[1]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_spec_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"kind\": \"ball\",\n  \"dim\": \n}").unwrap();
    let o = run(&["--domain", path.to_str().unwrap(), "metric", "--at", "[0]", "--dir", "[1]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn point_outside_the_domain_is_rejected() {
    let o = run(&["--domain", &zoo("ball2.json"), "metric", "--at", "[2,0]", "--dir", "[1,0]"]);
    assert!(!o.status.success());
}

#[test]
fn box_stress_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("box.csv");
    let o = run(&["--seed", "3", "--out", out.to_str().unwrap(), "boxlemma", "stress", "--dim", "3", "--instances", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let body = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body.lines().count(), 6);
    assert!(body.starts_with("instance,pairs,r_1,slack"));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("box.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn sweep_below_threshold_exits_one() {
    let o = run(&["--domain", &zoo("three_face.json"), "squeeze", "sweep", "--corner", "[1,-1]", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ratio"));
    let rows = stdout(&o).lines().count();
    assert_eq!(rows, 4);
}

#[test]
fn half_plane_domination_passes() {
    let o = run(&["--domain", &zoo("upper_halfplane.json"), "dominate", "--radii", "0.1,1", "--samples", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["manifest"]["seed"], 7);
}

#[test]
fn seed_and_domain_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_invmetric"))
        .args(["metric", "--at", "[0,0]", "--dir", "[1,0]"])
        .env("INVMETRIC_DOMAIN", zoo("ball2.json"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.0");
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sis-invariance"));
    c.env_remove("SIS_INVARIANCE_THREADS");
    c
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn analyze(args: &[&str]) -> Output {
    bin().arg("analyze").args(args).output().unwrap()
}

fn config(name: &str) -> String {
    config_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn json_report_is_deterministic_and_parses() {
    let cfg = config("two_periodic.json");
    let a = analyze(&[&cfg, "--grid", "64,8"]);
    let b = analyze(&[&cfg, "--grid", "64,8"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "sis-invariance/1");
    assert_eq!(v["order"]["declared"]["exact"], 2);
    assert_eq!(v["config"]["grid"]["samples_per_unit"], 64);
}

#[test]
fn thread_count_does_not_change_the_report() {
    let cfg = config("haar_pair.json");
    let one = bin().env("SIS_INVARIANCE_THREADS", "1").args(["analyze", &cfg, "--grid", "64,8"]).output().unwrap();
    let four = bin().env("SIS_INVARIANCE_THREADS", "4").args(["analyze", &cfg, "--grid", "64,8"]).output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn csv_bundle_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("csv");
    let report = dir.path().join("report.json");
    let out = analyze(&[
        &config("haar_pair.json"),
        "--grid",
        "64,8",
        "--n-max",
        "4",
        "--csv-dir",
        csv.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["frames"]["A"], 1.0);

    let dim = fs::read_to_string(csv.join("dimension.csv")).unwrap();
    assert_eq!(dim.lines().next(), Some("omega,dimension"));
    assert_eq!(dim.lines().count(), 65);
    for n in 2..=4 {
        let rank = fs::read_to_string(csv.join(format!("rank_n{n}.csv"))).unwrap();
        assert_eq!(rank.lines().next(), Some("omega,rank,rank_sum"));
        assert_eq!(rank.lines().count(), 65);
        assert!(csv.join(format!("residual_n{n}.csv")).exists());
    }
    assert!(!csv.join("rank_n5.csv").exists());
}

#[test]
fn no_oracle_drops_the_oracle_block() {
    let out = analyze(&[&config("two_periodic.json"), "--grid", "64,8", "--no-oracle"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["oracle"].is_null());
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"generators":[{"type":"piecewise_constant","breakpoints":["0","1/0"],"values":[[1,0]]}]}"#).unwrap();
    let out = analyze(&[bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generators[0]"));

    let out = analyze(&[&config("two_periodic.json"), "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_max must be ≥ 2"));

    let out = analyze(&[&config("two_periodic.json"), "--grid", "30,4"]);
    assert_eq!(out.status.code(), Some(0));
    let thirds = dir.path().join("thirds.json");
    fs::write(&thirds, r#"{"generators":[{"type":"piecewise_constant","breakpoints":["0","1/3"],"values":[[1,0]]}],"grid":{"M":32,"K":4}}"#).unwrap();
    let out = analyze(&[thirds.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_disagreement_exits_with_three() {
    // An oracle tolerance below rounding noise rejects every membership.
    let out = analyze(&[&config("two_periodic.json"), "--grid", "64,8", "--oracle-tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disagree"));
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("r.json");
    let out = analyze(&[&config("two_periodic.json"), "--grid", "64,8", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing/r.json"));
}

#[test]
fn missing_config_is_reported() {
    let out = analyze(&["/nonexistent/config.json"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/config.json"));
}

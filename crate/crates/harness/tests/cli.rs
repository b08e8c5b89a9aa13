use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = r#"{"kind":"falpha","alpha":0.5,"scale":1.0}"#;

fn alphasr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphasr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_f64(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).trim().parse().expect("a number")
}

#[test]
fn dist_eval_reads_closed_forms() {
    let eval = |what: &str, v: &str| stdout_f64(&alphasr(&["dist", "eval", "--spec", SPEC, "--v", v, "--what", what]));
    // Survival is (1 + v)^{-2} and the virtual value is (v - 1)/2 at this shape.
    assert!((eval("cdf", "1") - 0.75).abs() < 1e-12);
    assert!((eval("cdf", "3") - 0.9375).abs() < 1e-12);
    assert!((eval("phi", "3") - 1.0).abs() < 1e-12);
    assert!((eval("reserve", "0") - 1.0).abs() < 1e-12);
    // The quantile 1/4 is the value 1.
    assert!((eval("cr", "0.25") - 0.25).abs() < 1e-12);
    assert!(!alphasr(&["dist", "eval", "--spec", SPEC, "--v", "2", "--what", "cr"]).status.success());
}

#[test]
fn sample_then_build_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.txt");
    let report = dir.path().join("model.json");
    let s = samples.to_str().unwrap();
    assert!(alphasr(&["sample", "--spec", SPEC, "--m", "500", "--seed", "3", "--out", s]).status.success());
    assert_eq!(std::fs::read_to_string(&samples).unwrap().lines().count(), 500);
    let built = alphasr(&[
        "empirical", "build", "--in", s, "--m", "400", "--gamma", "0.1", "--xi", "0.05", "--delta", "0.05", "--report",
        report.to_str().unwrap(),
    ]);
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["reserve"].as_f64().unwrap() > 0.0);
    assert_eq!(json["validity"]["theorem_grade"], false);
    let too_many = alphasr(&["empirical", "build", "--in", s, "--m", "600", "--gamma", "0.1", "--xi", "0.05", "--delta", "0.05"]);
    assert!(!too_many.status.success());
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn mech_run_writes_info_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vcg.csv");
    let run = alphasr(&["mech", "run", "--mech", "vcg", "--trials", "5000", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "mech:vcg");
    assert_eq!(rows[0][1], "revenue");
    assert_eq!(rows[1][1], "welfare");
    assert!(rows.iter().all(|r| r[7] == "info" && r[8] == "7"));
}

#[test]
fn experiment_exit_code_follows_the_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cf.csv");
    let run = alphasr(&["experiment", "closed-form", "--out", out.to_str().unwrap()]);
    assert!(run.status.success());
    assert!(csv_rows(&out).iter().all(|r| r[7] == "pass"));
    let bad = alphasr(&["experiment", "no-such-id"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("lemma-suite"));
    let cfg = r#"{"trials": 0}"#;
    assert_eq!(alphasr(&["experiment", "vcgl", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn configured_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"trials": 3000, "master_seed": 11}"#;
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("run{k}.csv"))).collect();
    for p in &paths {
        assert!(alphasr(&["experiment", "vcgl", "--config", cfg, "--out", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

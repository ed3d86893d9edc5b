use std::path::PathBuf;
use std::process::Command;

use decorated_cli::run_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["decorated"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn help_exits_zero() {
    for args in [
        vec!["--help"],
        vec!["critical-curve", "--help"],
        vec!["verify", "--help"],
    ] {
        let (code, out, _) = run(&args);
        assert_eq!(code, 0);
        assert!(out.contains("Usage"), "{out}");
    }
}

#[test]
fn spin_one_inverse_fractions() {
    let (code, out, _) = run(&["vandermonde", "--spin", "2", "--inverse"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0,1,0\n-1/2,0,1/2\n1/2,-1,1/2\n");
}

#[test]
fn normalized_spin_three_halves() {
    let (code, out, _) = run(&["vandermonde", "--spin", "3", "--convention", "normalized"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1).unwrap(), "1,-1/3,1/9,-1/27");
}

#[test]
fn vandermonde_json() {
    let (code, out, _) = run(&["vandermonde", "--spin", "1", "--inverse", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["matrix"][1][0], "-1");
}

#[test]
fn validation_errors_name_the_flag() {
    let (code, _, err) = run(&["vandermonde", "--spin", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("--spin"), "{err}");

    let (code, _, err) = run(&[
        "critical-curve",
        "--spin",
        "2",
        "--k-min",
        "0",
        "--k-max",
        "1",
        "--k-step",
        "0",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--k-step"), "{err}");

    let (code, _, err) = run(&[
        "critical-curve",
        "--spin",
        "2",
        "--k-min",
        "1",
        "--k-max",
        "2",
        "--k-step",
        "0.1",
        "--d-min",
        "5",
        "--d-max",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--d-max"), "{err}");

    let (code, _, err) = run(&[
        "critical-curve",
        "--spin",
        "2",
        "--k-min",
        "1",
        "--k-max",
        "2",
        "--k-step",
        "0.1",
        "--tol",
        "-1",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--tol"), "{err}");

    let (code, _, err) = run(&["transform", "--cell", "/nonexistent/cell.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("--cell"), "{err}");

    let (code, _, _) = run(&["critical-curve", "--spin", "2"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn transform_two_leg_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cell = write_temp(
        &dir,
        "cell.json",
        r#"{"central": 1, "legs": [1, 1], "convention": "normalized",
            "couplings": [{"index": [1, 0], "value": 1.0}, {"index": [0, 1], "value": 1.0}]}"#,
    );
    let (code, out, err) = run(&["transform", "--cell", &cell]);
    assert_eq!(code, 0, "{err}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let pair = doc["couplings"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["index"] == serde_json::json!([1, 1]))
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((pair - 0.5 * 2f64.cosh().ln()).abs() < 1e-14);
    let constant = doc["constant"].as_f64().unwrap();
    let expected = 0.5 * (2.0 * 2f64.cosh()).ln() + 0.5 * 2f64.ln();
    assert!((constant - expected).abs() < 1e-14, "{constant} vs {expected}");
}

#[test]
fn transform_overflow_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cell = write_temp(
        &dir,
        "hot.json",
        r#"{"central": 2, "legs": [2], "couplings": [{"index": [1], "value": 1e6}]}"#,
    );
    let (code, _, err) = run(&["transform", "--cell", &cell]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn malformed_cell_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cell = write_temp(
        &dir,
        "bad.json",
        r#"{"central": 1, "legs": [1], "couplings": [{"index": [3], "value": 1}]}"#,
    );
    let (code, _, err) = run(&["alpha", "--cell", &cell]);
    assert_eq!(code, 1);
    assert!(err.contains("--cell"), "{err}");
}

#[test]
fn alpha_csv_columns() {
    let cell = specs_dir().join("cell_spin1_pair.json");
    let (code, out, _) = run(&["alpha", "--cell", cell.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n1,n2,value"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn critical_curve_csv_contract() {
    let args = [
        "critical-curve",
        "--spin",
        "2",
        "--k-min",
        "0",
        "--k-max",
        "3",
        "--k-step",
        "0.1",
    ];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("K_c,D_c,delta,ratio,w1,w2,w5"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.len() == 7));
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .all(|x| x.split('e').next().unwrap().trim_start_matches('-').len() == 18));
    assert!(err.contains("no root"));

    let (_, again, _) = run(&args);
    assert_eq!(out, again);
}

#[test]
fn critical_curve_without_roots_fails() {
    let (code, _, err) = run(&[
        "critical-curve",
        "--spin",
        "4",
        "--k-min",
        "0",
        "--k-max",
        "0.2",
        "--k-step",
        "0.1",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("no root"), "{err}");
}

#[test]
fn critical_curve_json_keeps_missing_points() {
    let (code, out, _) = run(&[
        "critical-curve",
        "--spin",
        "2",
        "--k-min",
        "0.5",
        "--k-max",
        "1.5",
        "--k-step",
        "0.5",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["root"].is_null());
    assert!(rows[2]["D_c"].is_f64());
}

#[test]
fn every_spec_file_verifies() {
    let mut seen = 0;
    for entry in std::fs::read_dir(specs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if !text.contains("sigma_sites") {
            continue;
        }
        seen += 1;
        let (code, out, err) = run(&["verify", "--spec", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {err}", path.display());
        assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
        assert!(out.contains("partition identity") && out.contains("correlation identity"));
    }
    assert!(seen >= 3);
}

#[test]
fn verify_rejects_bad_site() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(
        &dir,
        "spec.json",
        r#"{"sigma_spin": 1, "sigma_sites": 2, "cells": [{"central": 1, "sites": [0, 5]}]}"#,
    );
    let (code, _, err) = run(&["verify", "--spec", &spec]);
    assert_eq!(code, 1);
    assert!(err.contains("--spec"), "{err}");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("v.csv");
    let (code, out, _) = run(&["vandermonde", "--spin", "1", "--output", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(target).unwrap(), "1,-1/2\n1,1/2\n");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_decorated");
    let ok = Command::new(bin).args(["vandermonde", "--spin", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), "1,-1,1\n1,0,0\n1,1,1\n");
    let bad = Command::new(bin).args(["vandermonde", "--spin", "x"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

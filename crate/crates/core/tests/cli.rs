use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frw-acoustic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_single_case_prints_passing_json() {
    let o = bin(&["verify", "--curvature", "0", "--k", "1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["rms_residual"].as_f64().unwrap() < 1e-6);
    let w = v["omega"].as_f64().unwrap();
    assert!((w - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert!((v["freq_estimate"].as_f64().unwrap() - w).abs() / w < 1e-4);
}

#[test]
fn verify_suite_is_deterministic() {
    let a = bin(&["verify", "--suite", "default", "--seed", "3"]);
    let b = bin(&["verify", "--suite", "default", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["cases"].as_array().unwrap().len(), 8);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn non_integer_closed_k_exits_2_naming_rule() {
    let o = bin(&["verify", "--curvature", "1", "--k", "2.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K=+1 requires integer k >= 2"), "{}", stderr(&o));
}

#[test]
fn supercurvature_dispersion_exits_2() {
    let o = bin(&["dispersion", "--curvature", "1", "--k", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k^2 - K > 0"));
}

#[test]
fn bad_curvature_exits_2() {
    let o = bin(&["evolve", "--curvature", "2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dispersion_csv_round_trips_values() {
    let o = bin(&["dispersion", "--curvature", "0", "--k-min", "0.5", "--k-max", "2", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,omega,v_g"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[1] - r[0] / 3f64.sqrt()).abs() <= 2.0 * f64::EPSILON * r[1]);
        assert_eq!(r[2], 1.0 / 3f64.sqrt());
    }
}

#[test]
fn modes_csv_has_eigenvalue_comment() {
    let o = bin(&["modes", "--curvature", "1", "--k", "2", "--chi-max", "3", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    let ev: f64 = first.trim_start_matches("# eigenvalue = ").parse().unwrap();
    assert_eq!(ev, -3.0);
    assert_eq!(lines.next(), Some("chi,phi"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn evolve_then_reconstruct_differs_by_gauge_only() {
    let dir = tempfile::tempdir().unwrap();
    let evolved = dir.path().join("evolve.csv");
    let o = bin(&[
        "evolve", "--curvature", "-1", "--k", "2", "--seed", "11",
        "--output", evolved.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&evolved).unwrap();
    assert!(text.starts_with("eta,lambda,dlambda,mu,dmu,delta,psi\n"));
    assert_eq!(text.lines().count(), 2001);

    let o = bin(&["reconstruct", "--curvature", "-1", "--input", evolved.to_str().unwrap(), "--decompose"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert!(summary["relative_residual"].as_f64().unwrap() < 1e-6, "{summary}");
    assert!(stdout(&o).starts_with("eta,delta,gauge_part,non_gauge_part\n"));
}

#[test]
fn analytic_reconstruction_of_constant_psi() {
    let o = bin(&["reconstruct", "--curvature", "0", "--A", "1", "--omega", "0", "--eta-min", "0.5", "--eta-max", "2", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[0] * v[0] / 4.0).abs() < 1e-10, "{line}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"curvature": 1, "k": 3, "seed": 5, "samples": 400}"#).unwrap();
    let o = bin(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["curvature"], 1);
    assert_eq!(v["samples"], 400);
    let o = bin(&["verify", "--config", cfg.to_str().unwrap(), "--k", "7"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"].as_f64(), Some(7.0));

    fs::write(&cfg, r#"{"curvature": 0, "kk": 1}"#).unwrap();
    let o = bin(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn explicit_initial_state_is_reported_without_seed() {
    let o = bin(&["verify", "--curvature", "0", "--k", "5", "--initial", "0.1,-0.2,0.3,-0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["seed"].is_null());
}

#[test]
fn psi_singularity_in_range_is_rejected() {
    let o = bin(&["evolve", "--curvature", "1", "--k", "3", "--eta-min", "1.0", "--eta-max", "2.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_fields_match_schema() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let def = &schema["$defs"]["report"];
    let mut required: Vec<&str> = def["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    required.sort_unstable();

    let o = bin(&["verify", "--curvature", "-1", "--k", "0.5", "--samples", "300"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, required);
}

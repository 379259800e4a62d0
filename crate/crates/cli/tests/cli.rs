use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn osg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osg"))
        .args(args)
        .current_dir(dir)
        .env_remove("OSG_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn paths_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = osg(&["paths"], dir.path());
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["eps_tau", "l_plus", "sigma_plus", "l_minus", "sigma_minus"]);
    assert_eq!(rows[0][1], 0.0);
    assert_eq!(rows[0][3], 0.0);
    for r in &rows {
        assert!((r[1] + r[3]).abs() <= 1e-12 * r[1].abs().max(1e-30));
    }
    let at6 = rows.iter().find(|r| (r[0] - 6.0).abs() < 1e-9).unwrap();
    assert!((at6[1] - at6[3]).abs() / (at6[2] + at6[4]) > 1.0);
}

#[test]
fn distinguishability_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = osg(&["distinguishability"], dir.path());
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["eps_tau", "D", "abs_overlap"]);
    assert_eq!(rows[0][1], 0.0);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn overlap_csv_has_both_ladders() {
    let dir = tempfile::tempdir().unwrap();
    let out = osg(&["overlap", "--region", "antinodal"], dir.path());
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["eps_tau", "n", "re", "im", "abs"]);
    assert_eq!(rows.len(), 2 * 201);
    assert!((rows[0][4] - 1.0).abs() < 1e-12 && (rows[1][4] - 1.0).abs() < 1e-12);
}

#[test]
fn protocol_report_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"theta": 1.0, "classifier": "ideal", "n_trials": 20000}"#);
    let a = osg(&["protocol", "--config", &cfg, "--seed", "5"], dir.path());
    let b = osg(&["protocol", "--config", &cfg, "--seed", "5"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let rate = v["stats"]["success_rate"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 4.0 * (0.25f64 / 20000.0).sqrt());
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 11);
    let row2 = &table[1];
    assert!((row2["analytic"].as_f64().unwrap() - (1.0 + 1f64.cos()) / 8.0).abs() < 1e-15);
    assert!(table.iter().all(|r| r["within_4_sigma"].as_bool().unwrap()));
}

#[test]
fn probe_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = osg(&["probe", "--trials", "4000"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["band_ratio"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["vacuum_classified_zero"].as_f64().unwrap(), 1.0);
    assert!(v["within_4_sigma"].as_bool().unwrap());
    assert!(!v["unreliable"].as_bool().unwrap());
}

#[test]
fn oracle_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), r#"{"oracle_draws": 1}"#);
    let out = osg(&["oracle-check", "--config", &ok], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["selected_convention"], "fock_scaled");
    let strict = write_config(dir.path(), r#"{"oracle_draws": 1, "oracle_tolerance_factor": 1e-30}"#);
    assert_eq!(osg(&["oracle-check", "--config", &strict], dir.path()).status.code(), Some(3));
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for json in [r#"{"theta": 5.0}"#, r#"{"unknown_key": 1}"#, r#"{"mass": 0}"#, "not json"] {
        let cfg = write_config(dir.path(), json);
        let out = osg(&["paths", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(2), "{json}");
    }
    assert_eq!(osg(&["paths", "--region", "sideways"], dir.path()).status.code(), Some(2));
}

#[test]
fn output_locations() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_osg"))
        .args(["distinguishability"])
        .env("OSG_OUTPUT_DIR", dir.path().join("results"))
        .output()
        .unwrap();
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("results/distinguishability.csv")).unwrap();
    assert!(text.starts_with("eps_tau,D,abs_overlap\n"));

    let target = dir.path().join("p.csv");
    let out = osg(&["paths", "--out", target.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    assert!(std::fs::read_to_string(target).unwrap().starts_with("eps_tau,"));
}

#[test]
fn dimensionless_paths_match_si_in_units() {
    let dir = tempfile::tempdir().unwrap();
    let si = osg(&["paths"], dir.path());
    let nat = osg(&["paths", "--dimensionless"], dir.path());
    assert!(nat.status.success());
    let (_, a) = csv_rows(&String::from_utf8(si.stdout).unwrap());
    let (_, b) = csv_rows(&String::from_utf8(nat.stdout).unwrap());
    let length = (1.054571817e-34f64 / (1e-26 * 1e5)).sqrt();
    for (ra, rb) in a.iter().zip(&b).skip(1) {
        assert!((ra[1] / (rb[1] * length) - 1.0).abs() < 1e-9);
        assert!((ra[2] / (rb[2] * length) - 1.0).abs() < 1e-9);
    }
}

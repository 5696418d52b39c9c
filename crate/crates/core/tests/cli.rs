use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calogero"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn spectrum_csv_contract() {
    let out = run(&["spectrum", "--format", "csv", "--trunc", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("n,energy"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10);
    assert_eq!(f(&rows[0][1]), 2.5);
    for w in rows.windows(2) {
        assert!((f(&w[1][1]) - f(&w[0][1]) - 2.0).abs() < 1e-12);
    }
    // 17 significant digits
    assert_eq!(rows[3][1], "8.5000000000000000e0");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(run(&["spectrum", "--trunc", "3"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--eta", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["state", "--z", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--z-grid", "0:1:0"]).status.code(), Some(2));
    assert_eq!(run(&["wavefunction", "--x-max", "0"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn bg_vacuum_is_a_single_row() {
    let out = run(&["state", "--kind", "bg", "--z", "0,0", "--format", "csv"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert_eq!(f(&rows[0][3]), 1.0);
}

#[test]
fn intelligent_at_unit_lambda_reproduces_bg() {
    let bg = run_json(&["state", "--kind", "bg", "--z", "0.6,-0.2", "--beta", "0.3"]);
    let is = run_json(&[
        "state",
        "--kind",
        "intelligent",
        "--z",
        "0.6,-0.2",
        "--lambda",
        "1,0",
        "--beta",
        "0.3",
    ]);
    let (a, b) = (
        bg["coefficients"].as_array().unwrap(),
        is["coefficients"].as_array().unwrap(),
    );
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x["n"], y["n"]);
        let d = (x["re"].as_f64().unwrap() - y["re"].as_f64().unwrap())
            .hypot(x["im"].as_f64().unwrap() - y["im"].as_f64().unwrap());
        assert!(d < 1e-12);
    }
}

#[test]
fn state_report_and_diagnostics() {
    let v = run_json(&["state", "--kind", "intelligent", "--z", "0.5,0", "--lambda", "2,0"]);
    assert!(v["variance_report"]["saturation_residual"].as_f64().unwrap() < 1e-8);
    assert!(v["diagnostics"]["tail_mass"].as_f64().unwrap() < 1e-20);
    assert_eq!(v["schema_version"], 1);
    let kp = run_json(&["state", "--kind", "kp", "--z", "0.4,0.3"]);
    assert!((kp["diagnostics"]["norm_sqr"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn non_positive_lambda_is_domain_error() {
    assert_eq!(
        run(&["state", "--kind", "intelligent", "--lambda=-0.5,0"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["state", "--kind", "intelligent", "--lambda", "0,1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn sweep_grid_shape_and_laws() {
    let out = run(&[
        "sweep",
        "--format",
        "csv",
        "--lambda-grid",
        "0.5:2:3",
        "--z-grid",
        "0:1:3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let l2 = f(&r[0]).powi(2) + f(&r[1]).powi(2);
        let (va, vb) = (f(&r[4]), f(&r[5]));
        assert!((va / vb - l2).abs() < 1e-8);
        assert!(f(&r[7]) < 1e-8);
        assert!(r[8].is_empty());
    }
    // lambda-major ordering
    assert_eq!(f(&rows[0][0]), 0.5);
    assert_eq!(f(&rows[2][0]), 0.5);
    assert_eq!(f(&rows[3][0]), 1.25);

    let unit = run(&[
        "sweep",
        "--format",
        "csv",
        "--lambda-grid",
        "1:1:1,-0.0:0:1",
        "--z-grid",
        "0:1:2,0:1:2",
    ]);
    for r in csv_rows(&unit) {
        assert!((f(&r[4]) - f(&r[5])).abs() < 1e-8);
    }
}

#[test]
fn sweep_partial_failure_keeps_going() {
    let out = run(&["sweep", "--format", "csv", "--lambda-grid=-1:1:2", "--z-grid", "0:0:1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(!rows[0][8].is_empty() && rows[0][4].is_empty());
    assert!(rows[1][8].is_empty());
    let all_bad = run(&["sweep", "--lambda-grid=-1:-0.5:2"]);
    assert_eq!(all_bad.status.code(), Some(3));
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn sweep_output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "sweep",
        "--format",
        "csv",
        "--lambda-grid",
        "0.5:2:4,0:0.5:2",
        "--z-grid",
        "0:1:3",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_calogero"))
        .args(args)
        .args(["--out", a.to_str().unwrap()])
        .env("CALOGERO_THREADS", "1")
        .status()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_calogero"))
        .args(args)
        .args(["--out", b.to_str().unwrap()])
        .env("CALOGERO_THREADS", "4")
        .status()
        .unwrap();
    assert!(one.success() && many.success());
    assert_eq!(read(&a), read(&b));
    let bad = Command::new(env!("CARGO_BIN_EXE_calogero"))
        .args(args)
        .env("CALOGERO_THREADS", "x")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn wavefunction_samples() {
    let out = run(&[
        "wavefunction",
        "--format",
        "csv",
        "--n",
        "4",
        "--points",
        "2000",
        "--x-max",
        "12",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2000);
    assert!(f(&rows[0][0]) > 0.0);
    assert!((f(&rows[1999][2]) - 1.0).abs() < 1e-6);

    // eta = 0, n = 0: 2 pi^{-1/4} x e^{-x^2/2}
    let out = run(&[
        "wavefunction",
        "--format",
        "csv",
        "--eta",
        "0",
        "--points",
        "50",
        "--x-max",
        "5",
    ]);
    let c = 2.0 * std::f64::consts::PI.powf(-0.25);
    for r in csv_rows(&out) {
        let x = f(&r[0]);
        assert!((f(&r[1]) - c * x * (-x * x / 2.0).exp()).abs() < 1e-14);
    }

    // (-1)^n near the origin, where L_n(0) > 0
    for n in 0..6 {
        let n_s = n.to_string();
        let out = run(&[
            "wavefunction",
            "--format",
            "csv",
            "--n",
            &n_s,
            "--points",
            "10",
            "--x-max",
            "0.05",
        ]);
        let psi = f(&csv_rows(&out)[0][1]);
        assert_eq!(psi > 0.0, n % 2 == 0, "n = {n}");
    }
}

#[test]
fn verify_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["verify", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&read(&path)).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["checks", "config", "discrepancies", "params"]);
    assert_eq!(v["discrepancies"].as_array().unwrap().len(), 8);
    assert_eq!(v["config"]["schema_version"], 1);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCALAR: &str =
    r#"{"N": 1, "alpha": 1.0, "s": 1.0, "B": [[[0.0, 0.0]]], "tt_poly": [[[[1.0, 0.0]]]]}"#;
const DG1: &str = r#"{"N": 2, "alpha": 1.0, "s": 1.0, "dg1": {"N": 2, "nu": [[1.0, 0.0]]}}"#;
const DG1_NORMALIZED: &str = r#"{"N": 2, "alpha": 1.0, "s": 1.0, "normalize_gamma0": true, "dg1": {"N": 2, "nu": [[1.0, 0.0]]}}"#;

fn write_spec(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn mvop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvop"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_structural_scalar_passes() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "scalar.json", SCALAR);
    let out = dir.path().join("rep");
    let o = mvop(&[
        "verify",
        "--spec",
        arg(&spec),
        "--nmax",
        "5",
        "--s-list",
        "1",
        "--suite",
        "structural",
        "--out",
        arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries.iter().filter(|e| e["suite"] == "structural") {
        assert!(e["rel_residual"].as_f64().unwrap() <= 1e-8, "{e}");
    }
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "suite,n,s,identity,abs_residual,rel_residual,tolerance,pass"
    );
    assert_eq!(lines.count(), entries.len());
}

#[test]
fn verify_rows_are_deterministic_and_sorted() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1.json", DG1);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = mvop(&[
            "verify",
            "--spec",
            arg(&spec),
            "--nmax",
            "2",
            "--s-list",
            "1,0.5",
            "--suite",
            "all",
            "--out",
            arg(&out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stdout)
        );
        fs::read_to_string(out.with_extension("csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let keys: Vec<(String, usize, String)> = a
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[3].to_string())
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    assert!(keys.iter().any(|k| k.0 == "section-final"));
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1.json", DG1);
    let out = dir.path().join("rep");
    let o = Command::new(env!("CARGO_BIN_EXE_mvop"))
        .args([
            "verify",
            "--spec",
            arg(&spec),
            "--nmax",
            "2",
            "--suite",
            "structural",
            "--out",
            arg(&out),
        ])
        .env("MVOP_TOL_SCALE", "1e-12")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn structural_error_exits_two_with_json() {
    let dir = TempDir::new().unwrap();
    // x^{α−1+2λ}/x is not integrable at the origin when s = 0
    let spec = write_spec(
        &dir,
        "div.json",
        r#"{"N": 2, "alpha": 0.5, "s": 0.0, "B": [[[-0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}"#,
    );
    let o = mvop(&["moments", "--spec", arg(&spec), "--kmax", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(diag["error"], "DivergentMoment");
    assert_eq!(diag["structural"], true);
}

#[test]
fn missing_spec_exits_two() {
    let o = mvop(&["family", "--spec", "/nonexistent/spec.json", "--nmax", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(diag["error"], "Io");
}

#[test]
#[allow(clippy::excessive_precision)]
fn moments_table() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "scalar.json", SCALAR);
    let o = mvop(&["moments", "--spec", arg(&spec), "--kmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,row,col,re,im");
    assert_eq!(rows.len(), 1 + 5);
    // M_0 = 2 K_2(2)
    let m0: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!((m0 - 2.0 * 0.253_759_754_566_055_86).abs() < 1e-13);
}

#[test]
fn family_degree_zero() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1.json", DG1);
    let o = mvop(&["family", "--spec", arg(&spec), "--nmax", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["coeffs"][0].as_array().unwrap().len(), 0);
    assert_eq!(v["gamma"].as_array().unwrap().len(), 1);
    let mom = mvop(&["moments", "--spec", arg(&spec), "--kmax", "0"]);
    let text = String::from_utf8(mom.stdout).unwrap();
    let m0: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("0,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    // γ_0 M_0 = I
    let g: Vec<f64> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| v["gamma"][0][i][j][0].as_f64().unwrap())
        .collect();
    let prod00 = g[0] * m0[0] + g[1] * m0[2];
    let prod01 = g[0] * m0[1] + g[1] * m0[3];
    assert!((prod00 - 1.0).abs() < 1e-12 && prod01.abs() < 1e-12);
}

#[test]
fn zero_length_evolution() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1.json", DG1);
    let o = mvop(&[
        "evolve",
        "--spec",
        arg(&spec),
        "--n",
        "1",
        "--s0",
        "1",
        "--s1",
        "1",
        "--dump-trajectory",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("1,"));
    let o = mvop(&[
        "evolve",
        "--spec",
        arg(&spec),
        "--n",
        "1",
        "--s0",
        "1",
        "--s1",
        "1",
    ]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reference_deviation"].as_f64().unwrap(), 0.0);
}

#[test]
fn evolution_summary() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "scalar.json", SCALAR);
    let o = mvop(&[
        "evolve",
        "--spec",
        arg(&spec),
        "--n",
        "2",
        "--s0",
        "0.5",
        "--s1",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["reference_deviation"].as_f64().unwrap() <= 1e-5);
    assert!(v["accepted"].as_u64().unwrap() > 0);
}

#[test]
fn bootstrap_command() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1n.json", DG1_NORMALIZED);
    let o = mvop(&["bootstrap", "--spec", arg(&spec), "--nmax", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 5);
    let raw = write_spec(&dir, "dg1.json", DG1);
    let o = mvop(&["bootstrap", "--spec", arg(&raw), "--nmax", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn piii_scan() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "scalar.json", SCALAR);
    let o = mvop(&[
        "piii",
        "--spec",
        arg(&spec),
        "--n",
        "1",
        "--s0",
        "0.5",
        "--s1",
        "2",
        "--ds",
        "0.05",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["scan"]["max_first_order"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn sweep_in_parallel_matches_serial() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dg1.json", DG1);
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = mvop(&[
            "sweep",
            "--spec",
            arg(&spec),
            "--param",
            "s",
            "--from",
            "0.5",
            "--to",
            "2",
            "--steps",
            "4",
            "--suite",
            "discrete",
            "--nmax",
            "3",
            "--jobs",
            jobs,
            "--out",
            arg(&out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stdout)
        );
        fs::read_to_string(out.with_extension("csv")).unwrap()
    };
    let serial = run("1", "one");
    assert_eq!(serial, run("4", "four"));
    let svals: std::collections::BTreeSet<&str> = serial
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(svals.len(), 4);
    let o = mvop(&[
        "sweep",
        "--spec",
        arg(&spec),
        "--param",
        "alpha",
        "--from",
        "1",
        "--to",
        "2",
        "--steps",
        "2",
        "--suite",
        "discrete",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = mvop(&[
        "verify",
        "--spec",
        "x.json",
        "--nmax",
        "1",
        "--suite",
        "everything",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

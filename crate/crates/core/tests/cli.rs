use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use momentgate::approx::SampledSequence;
use momentgate::functionals::MomentSequence;
use momentgate::io;
use momentgate::scalar::Ext;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_momentgate"));
    c.env_remove("MOMENTGATE_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let p = dir.path().join(format!("{}.json", name));
    let mut args = vec!["fixture", name, "--output", s(&p)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn determinacy_of_normal_fixture() {
    let dir = TempDir::new().unwrap();
    let p = fixture(&dir, "normal", &["--degree", "16"]);
    let v = report(&run(&["determinacy", s(&p)]));
    assert_eq!(v["command"], "determinacy");
    assert_eq!(v["precision"], "ext256");
    assert_eq!(v["report"]["verdict"], "DeterminateEvidence");
    assert_eq!(v["report"]["defects"][0].as_array().unwrap().len(), 3);
    let s_at_i = v["report"]["s_at_i"].as_array().unwrap();
    assert_eq!(s_at_i.len(), 17);
}

#[test]
fn determinacy_of_lognormal_fixture() {
    let dir = TempDir::new().unwrap();
    let p = fixture(&dir, "lognormal", &["--degree", "20"]);
    let ms: MomentSequence<Ext<256>> = io::read_moments(&p).unwrap();
    assert_eq!(ms.degree(), 20);
    let v = report(&run(&["determinacy", s(&p)]));
    assert_eq!(v["report"]["verdict"], "IndeterminateEvidence");
}

#[test]
fn short_sequence_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "short.json", &json!({"degree": 1, "moments": [1, 0, 1]}));
    let v = report(&run(&["determinacy", s(&p)]));
    assert_eq!(v["report"]["verdict"], "Inconclusive");
    assert!(v["report"]["evidence"][0].as_str().unwrap().contains("insufficient moments"));
}

#[test]
fn non_psd_hankel_is_a_result() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", &json!({"degree": 1, "moments": [1, 0, -1]}));
    let v = report(&run(&["hankel", s(&p)]));
    assert_eq!(v["report"]["psd"], false);
    assert_eq!(v["report"]["failure"]["index"], 1);
}

#[test]
fn hankel_and_gns_reports() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d0.json", &json!({"degree": 2, "moments": [1, 0, 0, 0, 0]}));
    let v = report(&run(&["hankel", s(&p)]));
    assert_eq!(v["precision"], "f64");
    assert_eq!((v["report"]["rank"].clone(), v["report"]["kernel_dim"].clone()), (json!(1), json!(2)));
    let p = write(&dir, "n.json", &json!({"degree": 2, "moments": [1, 0, 1, 0, 3]}));
    let v = report(&run(&["gns", s(&p)]));
    for key in ["rank", "alpha", "beta", "psd", "kernel_dim"] {
        assert!(v["report"].get(key).is_some(), "missing {}", key);
    }
    assert_eq!(v["report"]["rank"], 3);
    let v = report(&run(&["quadrature", s(&p), "--points", "2"]));
    let nodes: Vec<f64> = serde_json::from_value(v["report"]["nodes"].clone()).unwrap();
    assert!((nodes[0] + 1.0).abs() < 1e-12 && (nodes[1] - 1.0).abs() < 1e-12);
}

#[test]
fn strict_on_indicator_fixture() {
    let dir = TempDir::new().unwrap();
    let seq = fixture(&dir, "example32", &[]);
    let zero = fixture(&dir, "zero", &[]);
    let parsed: SampledSequence = io::read_sequence(&seq).unwrap();
    assert_eq!(parsed.len(), 150);
    let v = report(&run(&["strict", s(&seq), s(&zero), "--ideal", "bounded"]));
    assert_eq!(v["report"]["verdict"], false);
    assert_eq!(v["report"]["via_corollary"], false);
    let v = report(&run(&["strict", s(&seq), s(&zero), "--ideal", "all"]));
    assert_eq!(v["report"]["verdict"], true);
    let v = report(&run(&["strict", s(&seq), s(&zero), "--ideal", "poly:1"]));
    assert_eq!(v["report"]["verdict"], true);
}

#[test]
fn dini_and_sw() {
    let dir = TempDir::new().unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let members: Vec<Vec<f64>> = (1..=20).map(|k| grid.iter().map(|x| x / k as f64).collect()).collect();
    let seq = write(&dir, "seq.json", &json!({"grid": grid, "members": members}));
    let v = report(&run(&["dini", s(&seq), "--eps", "0.1", "--interval", "0", "1"]));
    assert_eq!(v["report"]["k"], 10);

    let grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let abs: Vec<f64> = grid.iter().map(|x: &f64| x.abs()).collect();
    let target = write(&dir, "t.json", &json!({"grid": grid, "values": abs}));
    let gens = write(&dir, "g.json", &json!([{"poly": [1]}, {"poly": [0, 1]}]));
    let v = report(&run(&["approx", "sw", s(&target), s(&gens), "--eps", "0.05", "--interval", "-1", "1"]));
    assert_eq!(v["report"]["sup_error"].as_f64(), Some(0.0));
    let expr = momentgate::approx::LatticeExpr::from_json(&v["report"]["expr"]).unwrap();
    assert!(expr.node_count() >= 3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["hankel"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let even = write(&dir, "even.json", &json!({"moments": [1, 0]}));
    assert_eq!(run(&["hankel", s(&even)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["hankel", s(&missing)]).status.code(), Some(3));
    let n = write(&dir, "n.json", &json!({"degree": 1, "moments": [1, 0, 1]}));
    assert_eq!(run(&["quadrature", s(&n), "--points", "9"]).status.code(), Some(2));
    assert_eq!(run(&["hankel", s(&n), "--psd-tol=-1"]).status.code(), Some(2));
    assert_eq!(run(&["hankel", s(&n), "--precision", "ext64"]).status.code(), Some(2));
    let unwritable = dir.path().join("no/such/dir/out.json");
    assert_eq!(run(&["hankel", s(&n), "--output", s(&unwritable)]).status.code(), Some(3));

    let grid: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
    let sq: Vec<f64> = grid.iter().map(|x| x * x).collect();
    let target = write(&dir, "t.json", &json!({"grid": grid, "values": sq}));
    let gens = write(&dir, "g.json", &json!([{"poly": [1]}, {"poly": [0, 1]}]));
    let out = run(&[
        "approx", "sw", s(&target), s(&gens), "--eps", "0.001", "--interval", "-1", "1", "--node-budget", "5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = fixture(&dir, "normal", &["--degree", "8"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        assert!(run(&["determinacy", s(&p), "--output", s(out)]).status.success());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["command"], "determinacy");
}

#[test]
fn environment_overrides_precision() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "n.json", &json!({"degree": 2, "moments": [1, 0, 1, 0, 3]}));
    let out = bin()
        .args(["gns", s(&p), "--precision", "f64"])
        .env("MOMENTGATE_PRECISION", "ext128")
        .output()
        .unwrap();
    let v = report(&out);
    assert_eq!(v["precision"], "ext128");
    assert!(v["report"]["beta"][0].is_string());
    let v = report(&run(&["gns", s(&p), "--precision", "f64"]));
    assert_eq!(v["precision"], "f64");
    assert!(v["report"]["beta"][0].is_number());
}

#[test]
fn emitted_moment_fixtures_reparse() {
    let dir = TempDir::new().unwrap();
    let p = fixture(&dir, "uniform", &["--degree", "4"]);
    let ms: MomentSequence = io::read_moments(&p).unwrap();
    assert_eq!(ms.moments()[2], 1.0 / 3.0);
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.contains("\"degree\": 4"));
}

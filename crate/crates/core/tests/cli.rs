//! End-to-end runs of the `hypk` binary.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn hypk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypk")).args(args).output().expect("binary runs")
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn centre_start_gives_uniform_rows() {
    let out = hypk(&["kernel", "--model", "h2", "--eta", "0", "--eta-bar", "1", "--grid", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "angle,density,truncation_bound");
    let d = csv_column(&text, 1);
    assert_eq!(d.len(), 8);
    assert!(d.iter().all(|v| (v - 1.0 / (2.0 * PI)).abs() < 1e-15));
}

#[test]
fn hn_table_integrates_to_one() {
    let out = hypk(&["kernel", "--model", "hn", "--dim", "3", "--eta", "0.5", "--eta-bar", "1.2", "--grid", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (a, d) = (csv_column(&text, 0), csv_column(&text, 1));
    let trapezoid: f64 = a.windows(2).zip(d.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
    assert!((trapezoid - 1.0).abs() < 1e-3, "{trapezoid}");
    assert!(csv_column(&text, 2).iter().all(|b| *b >= 0.0 && *b < 1e-10));
}

#[test]
fn sphere_from_the_pole_is_uniform() {
    let out = hypk(&["kernel", "--model", "sphere", "--theta", "0", "--theta-bar", "1", "--grid", "16"]);
    assert!(out.status.success());
    let d = csv_column(&String::from_utf8(out.stdout).unwrap(), 1);
    assert!(d.iter().all(|v| (v - d[0]).abs() < 1e-15));
}

#[test]
fn exit_records() {
    let out = hypk(&["exit", "--geometry", "h2", "--eta1", "0.5", "--eta", "1.0", "--eta2", "2.0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["eta", "eta1", "eta2", "geometry", "n", "probability"]);
    assert_eq!(v["probability"].as_f64().unwrap(), hypk::exitprob::exit_prob_h2(1.0, 0.5, 2.0).unwrap());

    let out = hypk(&["exit", "--geometry", "hn", "--dim", "3", "--eta1", "0.5", "--eta", "1.0", "--eta2", "2.0"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let coth = |x: f64| 1.0 / x.tanh();
    let expect = (coth(2.0) - coth(1.0)) / (coth(2.0) - coth(0.5));
    assert!((v["probability"].as_f64().unwrap() - expect).abs() < 1e-14);

    let out = hypk(&["exit", "--geometry", "h2", "--eta1", "0.5", "--eta", "0.5", "--eta2", "2.0"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["probability"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulation_is_reproducible_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let args = [
            "simulate", "--model", "h2", "--eta", "0.8", "--eta-bar", "1.5", "--paths", "50000", "--step", "1e-3",
            "--seed", "42", "--out", p.to_str().unwrap(),
        ];
        let out = hypk(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        p
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(bytes).unwrap().lines().count(), 50_001);

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(Path::new(&format!("{}.manifest.json", a.display()))).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["parameters"]["step"].as_f64().unwrap(), 1e-3);
    assert!(manifest["tool_version"].is_string() && manifest["timestamp"].is_string());
}

#[test]
fn sequential_flag_and_thread_cap_do_not_change_output() {
    let base = ["simulate", "--model", "sphere", "--theta", "0.6", "--theta-bar", "1.2", "--paths", "300", "--step", "1e-3"];
    let par = hypk(&base);
    let mut seq_args = base.to_vec();
    seq_args.push("--sequential");
    let seq = hypk(&seq_args);
    assert!(par.status.success() && seq.status.success());
    assert_eq!(par.stdout, seq.stdout);
    let capped = Command::new(env!("CARGO_BIN_EXE_hypk")).args(base).env("HYPK_THREADS", "1").output().unwrap();
    assert_eq!(capped.stdout, par.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_hypk")).args(base).env("HYPK_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn exit_statuses() {
    assert_eq!(hypk(&["--help"]).status.code(), Some(0));
    assert_eq!(hypk(&["--version"]).status.code(), Some(0));
    assert_eq!(hypk(&["kernel"]).status.code(), Some(1));
    assert_eq!(hypk(&["kernel", "--model", "h2", "--eta", "1"]).status.code(), Some(1));
    let bad = hypk(&["kernel", "--model", "h2", "--eta", "2", "--eta-bar", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
    let truncated = hypk(&[
        "simulate", "--model", "h2", "--eta", "0.1", "--eta-bar", "2", "--paths", "100", "--max-steps", "5",
    ]);
    assert_eq!(truncated.status.code(), Some(3));
}

#[test]
fn fast_kernel_validation_passes() {
    let out = hypk(&["validate", "--suite", "kernels", "--fast"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let first = v["checks"][0].as_object().unwrap();
    let keys: Vec<&str> = first.keys().map(String::as_str).collect();
    assert_eq!(keys, ["criterion", "name", "passed", "relation", "statistic", "threshold"]);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn curvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_verdicts_per_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "thm13.json", r#"{"family":"thm13","phi":"exp(x1)"}"#);
    let out = curvlab(&["analyze", &cfg, "--points", "[[0,0,0,0],[0.5,0.2,-0.1,0.3]]"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    let points = report["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    for p in points {
        assert_eq!(p["properties"]["jacobi_videv"]["verdict"], false);
        assert_eq!(p["properties"]["pseudo_einstein"]["verdict"], true);
        assert!(p["invariants"].as_array().unwrap().iter().all(|i| i["ok"] == true));
    }

    let cfg = write(&dir, "thm19.json", r#"{"family":"thm19","s":1}"#);
    let out = curvlab(&["analyze", &cfg, "--points", "grid:2", "--lazy-nabla-r"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["points"].as_array().unwrap().len(), 16);
    for p in report["points"].as_array().unwrap() {
        assert_eq!(p["properties"]["skew_videv"]["verdict"], true);
        assert!(p["max_abs_nabla_r"]["value"].as_f64().unwrap() < 1e-9);
        assert!(p["rho_squared_plus_s2_residual"]["value"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "w.json", r#"{"family":"thm14","p":"x2","q":"x2"}"#);
    let a = curvlab(&["analyze", &cfg, "--seed", "7"]);
    let b = curvlab(&["analyze", &cfg, "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = curvlab(&["analyze", &cfg, "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(curvlab(&["model", "random", "--n", "5", "--neg", "2", "--seed", "3"]).stdout,
        curvlab(&["model", "random", "--n", "5", "--neg", "2", "--seed", "3"]).stdout);
}

#[test]
fn tolerance_flag_reaches_the_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"family":"walker","g34":"x0*x2"}"#);
    let out = curvlab(&["analyze", &cfg, "--points", "[[0.1,0.2,0.3,0.4]]", "--tol", "1e-6"]);
    let report = json(&out);
    assert_eq!(report["tolerances"]["pass"], 1e-6);
    assert_eq!(report["points"][0]["properties"]["jacobi_videv"]["tol"], 1e-6);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&curvlab(&["analyze", s(&dir.path().join("missing.json"))])), 2);
    let bad = write(&dir, "bad.json", r#"{"family":"thm13","phi":"exp(q*x1)"}"#);
    assert_eq!(code(&curvlab(&["analyze", &bad])), 2);
    let ok = write(&dir, "ok.json", r#"{"family":"thm13","phi":"exp(x1)"}"#);
    assert_eq!(code(&curvlab(&["analyze", &ok, "--points", "[[0,0,0]]"])), 2);
    let garbage = write(&dir, "m.json", "not json");
    assert_eq!(code(&curvlab(&["model", "validate", &garbage])), 2);
}

#[test]
fn evaluation_errors_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"family":"thm14case2","a":1,"b":0,"c":1}"#);
    let out = curvlab(&["analyze", &cfg, "--points", "[[0,0,0,-1]]"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain"));
}

#[test]
fn model_commands() {
    let dir = TempDir::new().unwrap();
    let sphere = dir.path().join("sphere.json");
    let out = curvlab(&["model", "canonical", "--n", "3", "--c", "1", "-o", s(&sphere)]);
    assert_eq!(code(&out), 0);
    let out = curvlab(&["model", "validate", s(&sphere)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["valid"], true);

    let doubled = dir.path().join("doubled.json");
    let out = curvlab(&["model", "double", s(&sphere), "-o", s(&doubled)]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["rho1_sq_plus_4s2_residual"]["value"].as_f64().unwrap() < 1e-12);
    let model: Value = serde_json::from_str(&std::fs::read_to_string(&doubled).unwrap()).unwrap();
    assert_eq!(model["n"], 6);

    // Doubling needs an Einstein input.
    let random = dir.path().join("random.json");
    assert_eq!(code(&curvlab(&["model", "random", "--n", "3", "--seed", "1", "-o", s(&random)])), 0);
    assert_eq!(code(&curvlab(&["model", "double", s(&random), "-o", s(&doubled)])), 5);

    // An indefinite inner product is rejected as input to doubling.
    let split = dir.path().join("split.json");
    assert_eq!(code(&curvlab(&["model", "canonical", "--n", "2", "--c", "-1", "--neg", "1", "-o", s(&split)])), 0);
    assert_eq!(code(&curvlab(&["model", "double", s(&split), "-o", s(&doubled)])), 2);

    let broken = write(&dir, "broken.json", r#"{"n":1,"metric":[[1.0]],"A":[1.0]}"#);
    let out = curvlab(&["model", "validate", &broken]);
    assert_eq!(json(&out)["valid"], false);
}

#[test]
fn suite_filter_and_exit_codes() {
    let out = curvlab(&["suite", "--filter", "engine"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 1);
    assert_eq!(criteria[0]["key"], "engine");

    let out = curvlab(&["suite", "--filter", "thm14", "--pretty"]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).all(|l| l.contains("thm14")));
    // Exit 1 exactly when some selected criterion fails.
    let failed = table.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(code(&out), if failed { 1 } else { 0 });

    assert_eq!(code(&curvlab(&["suite", "--filter", "no-such-criterion"])), 2);
}

//! End-to-end tests of the command-line interface: exit codes, report
//! schema, and CSV shapes, driven through the compiled binary.

mod common;

use std::io::Write as _;
use std::process::{Command, Output};

use serde_json::Value;

fn blendgas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blendgas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn csv_rows(text: &str) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}

#[test]
fn validate_reports_shape() {
    let out = blendgas(&["validate", &common::instance_path("table1_cycle.json")]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).contains("8 nodes, 8 edges, 1 independent cycle(s)"));
}

#[test]
fn solve_reports_cycle_solution() {
    let out = blendgas(&[
        "solve",
        &common::instance_path("table1_cycle.json"),
        "--cut-edge",
        "s4",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let report: Value = serde_json::from_str(&stdout_str(&out)).expect("JSON report");

    assert_eq!(report["solver"], "cut");
    assert_eq!(report["cut_edge"], "s4");
    assert!(report["residual_max"].as_f64().unwrap() < 1e-8);
    let lambda_star = report["lambda_star"].as_f64().unwrap();
    let mu_star = report["mu_star"].as_f64().unwrap();
    assert!(
        (lambda_star + 2.426562).abs() < 1e-5,
        "lambda* = {lambda_star}"
    );
    assert!((mu_star - 0.298182).abs() < 1e-5, "mu* = {mu_star}");

    let nodes = report["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 8);
    let v0 = nodes.iter().find(|n| n["id"] == "v0").unwrap();
    assert_eq!(v0["p"].as_f64().unwrap(), 60.0);
    assert_eq!(report["edges"].as_array().unwrap().len(), 8);
}

#[test]
fn solve_writes_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = blendgas(&[
        "solve",
        &common::instance_path("diamond.json"),
        "--solver",
        "lm",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).is_empty());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).expect("JSON report");
    assert_eq!(report["solver"], "lm");
    assert!(report["residual_max"].as_f64().unwrap() < 1e-8);
}

#[test]
fn missing_file_is_usage_error() {
    let out = blendgas(&["validate", "no_such_network.json"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).starts_with("error:"));
}

#[test]
fn unbalanced_loads_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unbalanced.json");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(
            br#"{
  "nodes": [
    { "id": "a", "load": -1.0, "supply_composition": 0.5, "pressure_anchor": 60.0 },
    { "id": "b", "load": 2.0 }
  ],
  "edges": [{ "id": "e", "foot": "a", "head": "b", "length": 1.0 }],
  "gas": { "sigma2_h2": 8.0, "sigma2_ng": 1.0 }
}"#,
        )
        .unwrap();
    let out = blendgas(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_str(&out).contains("invalid network"));
}

#[test]
fn overlong_pipe_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("drained.json");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(
            br#"{
  "nodes": [
    { "id": "a", "load": -1.0, "supply_composition": 0.5, "pressure_anchor": 60.0 },
    { "id": "b", "load": 1.0 }
  ],
  "edges": [{ "id": "e", "foot": "a", "head": "b", "length": 1e9 }],
  "gas": { "sigma2_h2": 8.0, "sigma2_ng": 1.0, "default_friction": 0.1 }
}"#,
        )
        .unwrap();
    let out = blendgas(&["solve", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_str(&out).contains("infeasible"));
}

#[test]
fn sweep_writes_csv_grid() {
    let out = blendgas(&[
        "sweep",
        &common::instance_path("diamond.json"),
        "--n-lambda",
        "6",
        "--n-mu",
        "5",
        "--lambda-range",
        "-2",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let rows = csv_rows(&stdout_str(&out));
    assert_eq!(rows[0], "lambda,mu,Hp,Heta,status");
    assert_eq!(rows.len(), 1 + 6 * 5);
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn g_curve_alias_traces_root_curve() {
    let out = blendgas(&[
        "g-curve",
        &common::instance_path("table1_cycle.json"),
        "--cut-edge",
        "s4",
        "--n-lambda",
        "9",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let rows = csv_rows(&stdout_str(&out));
    assert_eq!(rows[0], "lambda,mu,Hp,Heta,status");
    assert_eq!(rows.len(), 1 + 9);
    // Along the root curve the composition gap vanishes.
    for row in &rows[1..] {
        let heta: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(heta.abs() < 1e-12, "row: {row}");
    }
}

#[test]
fn slice_tracks_node_composition() {
    let out = blendgas(&[
        "slice",
        &common::instance_path("diamond.json"),
        "--node",
        "v4",
        "--n-lambda",
        "4",
        "--n-mu",
        "3",
        "--lambda-range",
        "-1",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let rows = csv_rows(&stdout_str(&out));
    assert_eq!(rows[0], "lambda,mu,eta,status");
    assert_eq!(rows.len(), 1 + 4 * 3);
    for row in &rows[1..] {
        let eta: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((eta - 0.75).abs() < 1e-8, "row: {row}");
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cylinder(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylinder"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn construct_monk_k2(dir: &Path) {
    let out = cylinder(dir, &["construct", "monk", "--graph", "complete:2", "--output", "monk.json"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn passing_check_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    construct_monk_k2(dir.path());
    let out = cylinder(dir.path(), &["check", "--input", "monk.json", "--output", "check.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "check.json");
    assert_eq!(r["exitCode"], 0);
    assert_eq!(r["result"]["passed"], true);
}

#[test]
fn failing_check_exits_one_with_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylinder(
        dir.path(),
        &["construct", "bin", "--n", "3", "--r", "1", "--cap", "2", "--output", "bin.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = cylinder(dir.path(), &["check", "--input", "bin.json", "--output", "check.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path(), "check.json");
    assert_eq!(r["result"]["passed"], false);
    assert!(!r["result"]["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let out = cylinder(dir.path(), &["check", "--input", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "usage-error");
    assert!(r["error"].as_str().unwrap().contains("parse"));
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    construct_monk_k2(dir.path());
    let out = cylinder(
        dir.path(),
        &["basis", "--input", "monk.json", "--mode", "relational", "--budget-states", "5"],
    );
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "budget-exhausted");
    assert_eq!(r["exitCode"], 3);
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylinder(dir.path(), &["suite", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn psi_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylinder(dir.path(), &["suite", "paper-psi", "--output", "psi.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "psi.json");
    assert_eq!(r["result"]["failedEntries"], 0);
}

#[test]
fn edge_lists_and_json_graphs_agree() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c5.txt"), "# five-cycle\n5\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
    let out = cylinder(dir.path(), &["graph", "--input", "c5.txt", "--output", "from_text.json"]);
    assert_eq!(out.status.code(), Some(0));
    let out = cylinder(dir.path(), &["graph", "--kind", "cycle:5", "--output", "from_spec.json"]);
    assert_eq!(out.status.code(), Some(0));
    let out = cylinder(dir.path(), &["graph", "--input", "from_spec.json", "--output", "from_json.json"]);
    assert_eq!(out.status.code(), Some(0));
    let results: Vec<Value> = ["from_text.json", "from_spec.json", "from_json.json"]
        .iter()
        .map(|f| report(dir.path(), f)["result"].clone())
        .collect();
    assert_eq!(results[0], results[1]);
    assert_eq!(results[1], results[2]);
}

#[test]
fn replay_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"ruleSet": "EF", "mode": "backAndForth", "pebbles": 2, "rounds": 3}"#;
    fs::write(dir.path().join("spec.json"), spec).unwrap();
    let out = cylinder(
        dir.path(),
        &["solve-game", "--input", "spec.json", "--a", "linear:4", "--b", "linear:3", "--output", "game.json"],
    );
    assert!(out.status.code().is_some_and(|c| c <= 1));
    let out = cylinder(dir.path(), &["replay", "game.json", "--output", "again.json"]);
    assert!(out.status.code().is_some_and(|c| c <= 1));
    let first = fs::read(dir.path().join("game.json")).unwrap();
    let second = fs::read(dir.path().join("again.json")).unwrap();
    assert_eq!(first, second);
}

use std::path::Path;
use std::process::{Command, Output};

fn gsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_search_finds_target() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("tree.txt");
    let out = gsearch(&["gen", "--kind", "random-tree", "--n", "64", "--seed", "4", "--out", path(&graph)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&graph).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 63);

    let out = gsearch(&["search", "--graph", path(&graph), "--searcher", "gamma", "--targets", "17"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let transcript: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let steps = transcript.as_array().unwrap();
    assert!(!steps.is_empty() && steps.len() <= 7);
    assert_eq!(steps.last().unwrap()["response"]["kind"], "found");
}

#[test]
fn gen_is_seeded() {
    let a = gsearch(&["gen", "--kind", "random-connected", "--n", "30", "--seed", "9"]);
    let b = gsearch(&["gen", "--kind", "random-connected", "--n", "30", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn phi_trap_forces_hundred_queries() {
    let out = gsearch(&["adversary", "--game", "phi-trap", "--n", "10000", "--epsilon", "0.1"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l == "forced_queries: 100"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "certified: true"), "{stdout}");
}

#[test]
fn experiment_csv_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = gsearch(&[
        "experiment", "--kind", "random-tree", "--n", "128", "--searcher", "tree-two-target", "--p1", "0.7",
        "--trials", "200", "--seed", "5", "--format", "csv", "--out", path(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 201);
    assert!(rows[0].starts_with("trial,seed,searcher"));
    assert!(text.lines().any(|l| l == "# trials=200"));

    let ok = gsearch(&["verify", "--input", path(&csv)]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));

    let bad = gsearch(&["verify", "--input", path(&csv), "--max-queries", "2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn experiment_json_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("runs.json");
    let out = gsearch(&[
        "experiment", "--kind", "path", "--n", "100", "--searcher", "gamma", "--trials", "20", "--format", "json",
        "--out", path(&json),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 20);
    assert_eq!(v["summary"]["success_rate"], 1.0);
    let ok = gsearch(&["verify", "--input", path(&json), "--max-queries", "8", "--min-success", "1.0"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gsearch(&["verify"]).status.code(), Some(2));
    assert_eq!(gsearch(&["gen", "--kind", "hypercube", "--n", "8"]).status.code(), Some(2));
    assert_eq!(gsearch(&["experiment", "--n", "8", "--searcher", "nonsense"]).status.code(), Some(2));
}

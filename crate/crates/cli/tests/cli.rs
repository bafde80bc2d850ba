use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conflict-fair"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const PATH3: &str = r#"{"agents":2,"items":3,"valuations":[[2,2,3],[6,5,6]],"edges":[[0,1],[1,2]]}"#;

fn k33() -> String {
    let edges: Vec<String> = (0..3).flat_map(|a| (3..6).map(move |b| format!("[{a},{b}]"))).collect();
    format!(
        r#"{{"agents":4,"items":6,"valuations":[{row},{row},{row},{row}],"edges":[{}]}}"#,
        edges.join(","),
        row = "[2,2,2,3,3,3]"
    )
}

#[test]
fn solve_mnw_on_path() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "p3.json", PATH3);
    let out = run(&["solve", "--instance", &inst, "--method", "mnw"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["allocation"]["bundles"], serde_json::json!([[0, 2], [1]]));
    assert_eq!(v["product"], "25");
    assert_eq!(v["ef1"], false);

    let out = run(&["solve", "--instance", &inst, "--method", "mnw-ef1"]);
    assert_eq!(json(&out)["allocation"]["bundles"], serde_json::json!([[1], [0, 2]]));
}

#[test]
fn every_method_returns_a_feasible_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        r#"{"agents":3,"items":5,"valuations":[[1,0,1,1,0],[0,1,1,0,1],[1,1,0,1,1]],"edges":[[0,1],[1,2],[3,4]]}"#;
    let inst = write(dir.path(), "paths.json", text);
    for method in ["mms-exact", "mnw", "mnw-ef1", "mms-approx", "random", "path-ef1", "component-ef1", "construct"] {
        let out = run(&["solve", "--instance", &inst, "--method", method, "--seed", "3", "--trials", "5"]);
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let alloc = serde_json::to_string(&json(&out)["allocation"]).unwrap();
        let a = write(dir.path(), "a.json", &alloc);
        let check = json(&run(&["check", "--instance", &inst, "--allocation", &a]));
        assert_eq!(check["feasible"], true, "{method}");
        assert_eq!(check["complete"], true, "{method}");
    }
}

#[test]
fn check_reports_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "p3.json", PATH3);
    let alloc = write(dir.path(), "a.json", r#"{"bundles":[[0,2],[1]]}"#);
    let v = json(&run(&["check", "--instance", &inst, "--allocation", &alloc]));
    assert_eq!(v["ef1"], false);
    assert_eq!(v["nash_welfare"]["product"], "25");
    let v = json(&run(&["check", "--instance", &inst, "--allocation", &alloc, "--criterion", "prop"]));
    assert_eq!(v["prop_ratio"], "10/17");
    assert!(v.get("ef1").is_none());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"agents":2,"items":2,"valuations":[[1,1]],"edges":[]}"#);
    assert_eq!(run(&["solve", "--instance", &bad, "--method", "mnw"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--instance", "/nonexistent.json", "--method", "mnw"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--method", "nope"]).status.code(), Some(2));

    let k33 = write(dir.path(), "k33.json", &k33());
    assert_eq!(run(&["solve", "--instance", &k33, "--method", "mnw-ef1"]).status.code(), Some(4));
    let out = run(&["solve", "--instance", &k33, "--method", "mnw", "--budget-nodes", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let tri = write(
        dir.path(),
        "tri.json",
        r#"{"agents":2,"items":3,"valuations":[[1,1,1],[1,1,1]],"edges":[[0,1],[1,2],[0,2]]}"#,
    );
    assert_eq!(run(&["solve", "--instance", &tri, "--method", "mms-exact"]).status.code(), Some(4));
}

#[test]
fn gen_writes_instances_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["gen", "--model", "ws", "--count", "3", "--seed", "9", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let manifest = std::fs::read_to_string(a.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest, std::fs::read_to_string(b.join("manifest.jsonl")).unwrap());
    let first: Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    let id = first["id"].as_str().unwrap();
    let inst: Value = serde_json::from_str(&std::fs::read_to_string(a.join(format!("{id}.json"))).unwrap()).unwrap();
    assert_eq!(inst["agents"], first["n"]);
    assert_eq!(run(&["gen", "--model", "xx", "--count", "1", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"models":["er","ws"],"per_model":2,"n_max":3,"m_cap":8,"trials":4}"#);
    let out = dir.path().join("out");
    let o = run(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(out.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count() as u64, json(&o)["records"].as_u64().unwrap());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let labels: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["er", "ws", "all"]);
    for name in ["random_alpha_mms", "free_random_alpha_mms", "mnw_alpha_mms", "free_mnw_alpha_mms"] {
        let h = std::fs::read_to_string(out.join(format!("hist_{name}.csv"))).unwrap();
        assert_eq!(h.lines().next(), Some("bin_edge,count"));
        assert_eq!(h.lines().count(), 13);
    }
    let bad = write(dir.path(), "bad.json", r#"{"per_model":"many"}"#);
    assert_eq!(run(&["experiment", "--config", &bad, "--out", "x"]).status.code(), Some(2));
}

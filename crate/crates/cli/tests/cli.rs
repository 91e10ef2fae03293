use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydanneal")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TRIANGLE: &str = r#"{"kind": "maxcut", "n": 3, "edges": [[0, 1], [1, 2], [0, 2]]}"#;
const EDGE: &str = r#"{"kind": "maxcut", "n": 2, "edges": [[0, 1, 1.0]]}"#;

/// Small budgets so the end-to-end runs stay quick.
const QUICK: &str = r#"
[solve]
samples = 20

[solve.integrator]
steps_per_us = 500.0

[solve.pipeline]
stage1_max_iter = 2
nm_max_iter = 30
nm_max_fev = 30
stage3_max_iter = 1
"#;

#[test]
fn brute_force_triangle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    let out = run(dir.path(), &["brute-force", "--graph", "tri.json", "--out", "res"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("res/brute_force.json"));
    assert_eq!(v["c_opt"], 2.0);
    assert_eq!(v["d_opt"], 6);
    assert_eq!(v["spectrum"]["levels"][1]["degeneracy"], 2);
}

#[test]
fn solve_single_edge_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "edge.json", EDGE);
    write(dir.path(), "run.toml", &format!("graph = \"edge.json\"\nout = \"res\"\n{QUICK}"));
    let out = run(dir.path(), &["solve", "--config", "run.toml", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let rec = json(&res.join("record.json"));
    assert_eq!(rec["result"]["approximation_ratio"], 1.0);
    assert_eq!(rec["config"]["seed"], 3);
    assert_eq!(rec["config"]["solve"]["protocol"]["duration"], 3.5);
    assert!(rec["version"].is_string());
    for f in ["trajectory.csv", "populations.csv", "schedule.csv"] {
        assert!(res.join(f).exists(), "{f} missing");
    }
    let traj = std::fs::read_to_string(res.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 22);
}

#[test]
fn infeasible_instance_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"kind": "maxcut", "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1000000.0]]}"#);
    for cmd in ["embed", "solve"] {
        let out = run(dir.path(), &[cmd, "--graph", "bad.json", "--out", "res"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn embed_reports_layout() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    let out = run(dir.path(), &["embed", "--graph", "tri.json", "--out", "res"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("res/layout.json"));
    assert_eq!(v["layout"]["positions"].as_array().unwrap().len(), 3);
    assert_eq!(v["feasibility"]["passes"], true);
}

#[test]
fn duration_guardrail() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "edge.json", EDGE);
    write(dir.path(), "run.toml", "graph = \"edge.json\"\n[solve.protocol]\nduration = 60.0\n");
    let out = run(dir.path(), &["solve", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));
}

#[test]
fn missing_graph_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--graph", "nope.json"]);
    assert_eq!(out.status.code(), Some(1));
}

/// CSV without the wall-clock column.
fn strip_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(4);
            cols.join(",")
        })
        .collect()
}

#[test]
fn benchmark_sa_family_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[family]
generator = "path"
kind = "maxcut"
n_min = 2
n_max = 10

[sa]
iterations = 10
runs = 20
"#;
    write(dir.path(), "bench.toml", cfg);
    let mut csvs = Vec::new();
    for out_dir in ["a", "b"] {
        let out = run(dir.path(), &["benchmark-sa", "--config", "bench.toml", "--seed", "5", "--out", out_dir]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read_to_string(dir.path().join(out_dir).join("sa_benchmark.csv")).unwrap());
    }
    assert_eq!(csvs[0].lines().count(), 10);
    assert_eq!(strip_runtime(&csvs[0]), strip_runtime(&csvs[1]));
}

#[test]
fn benchmark_sa_empty_family_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["benchmark-sa"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn benchmark_sa_budget_sweep() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    write(dir.path(), "sweep.toml", "graph = \"tri.json\"\nsa_budgets = [2, 4, 8]\n[sa]\nruns = 5\n");
    let out = run(dir.path(), &["benchmark-sa", "--config", "sweep.toml", "--out", "res"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/sa_benchmark.csv")).unwrap();
    let iters: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(iters, ["2", "4", "8"]);
}

#[test]
fn compare_and_noise_study() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    let cfg = format!(
        "graph = \"tri.json\"\nout = \"res\"\n{QUICK}\n[sa]\nruns = 5\n\n[noise]\nlevel = 0.05\ndraws = 3\nin_loop_draws = 2\n"
    );
    write(dir.path(), "run.toml", &cfg);
    let out = run(dir.path(), &["compare", "--config", "run.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("graph_name,N,HP"));

    let out = run(dir.path(), &["noise-study", "--config", "run.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("res/noise.json"));
    assert_eq!(v["report"]["draw_seeds"].as_array().unwrap().len(), 3);
    assert_eq!(v["report"]["post_hoc"]["draws"].as_array().unwrap().len(), 3);
    let draws = std::fs::read_to_string(dir.path().join("res/noise_draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 1 + 6);
}

use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cimwalk"))
        .current_dir(dir)
        .args(args)
        .env_remove("CIMWALK_THREADS")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn simulate_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(dir.path(), &["simulate", "--p", "3", "--d", "1", "--n", "100", "--seed", "7", "--truth", "truth.json"]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x0,x1,x2");
    assert_eq!(lines.len(), 101);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
    let m = read_json(&dir.path().join("data.csv.manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 7);
}

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _, err) = run(d, &["simulate", "--p", "8", "--d", "2", "--n", "10000", "--seed", "3", "--truth", "truth.json"]);
    assert_eq!(code, 0, "{err}");
    for algo in ["greedy-cim", "skeletal-greedy-cim", "recurrent-cim"] {
        let out = format!("{algo}.json");
        let (code, _, err) = run(d, &["--threads", "1", "discover", "--algo", algo, "--data", "data.csv", "--out", &out]);
        assert_eq!(code, 0, "{err}");
        let r = read_json(&d.join(&out));
        for key in ["essential_graph", "score", "trace"] {
            assert!(r.get(key).is_some(), "{key}");
        }
        let manifest = read_json(&d.join(format!("{out}.manifest.json")));
        assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
        let (code, stdout, err) = run(d, &["compare", "--result", &out, "--truth", "truth.json"]);
        assert_eq!(code, 0, "{err}");
        let c: Value = serde_json::from_str(&stdout).unwrap();
        assert!(c["shd"].is_u64());
        assert!(c["recovered"].is_boolean());
    }
    let first = std::fs::read_to_string(d.join("greedy-cim.json")).unwrap();
    run(d, &["discover", "--data", "data.csv", "--out", "again.json"]);
    assert_eq!(std::fs::read_to_string(d.join("again.json")).unwrap(), first);
}

#[test]
fn score_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["simulate", "--p", "3", "--d", "1", "--n", "200", "--seed", "1"]);
    std::fs::write(d.join("g.txt"), "p 3\n0 -> 1\n").unwrap();
    let (code, stdout, err) = run(d, &["score", "--data", "data.csv", "--graph", "g.txt"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["score"].as_f64().unwrap() < 0.0);
}

#[test]
fn skeleton_census() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c4.graph"), "p 4\n0 -- 1\n1 -- 2\n2 -- 3\n3 -- 0\n").unwrap();
    let (code, _, err) = run(d, &["analyze-polytope", "--skeleton", "c4.graph", "--out", "c4.json"]);
    assert_eq!(code, 0, "{err}");
    let c = read_json(&d.join("c4.json"));
    assert_eq!(c["vertices"], 6);
    assert_eq!(c["same_skeleton_edges"], 15);
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _, err) = run(d, &["discover", "--data", "x.csv", "--alpha", "1.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha"));
    assert_eq!(run(d, &["simulate", "--p", "3", "--d", "9", "--n", "5"]).0, 2);
    assert_eq!(run(d, &["analyze-polytope", "--p", "5"]).0, 2);
    assert_eq!(run(d, &["frobnicate"]).0, 2);
    std::fs::write(d.join("bad.csv"), "a,b\n1,oops\n").unwrap();
    let (code, _, err) = run(d, &["discover", "--data", "bad.csv"]);
    assert_eq!(code, 2, "{err}");
    assert_eq!(run(d, &["discover", "--data", "missing.csv"]).0, 2);
    let rows: String = (0..50).map(|k| format!("{k},{}\n", 2 * k)).collect();
    std::fs::write(d.join("collinear.csv"), format!("a,b\n{rows}")).unwrap();
    let (code, _, err) = run(d, &["discover", "--data", "collinear.csv"]);
    assert_eq!(code, 1, "{err}");
}

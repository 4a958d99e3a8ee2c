use std::path::Path;
use std::process::{Command, Output};

fn xoj(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xoj")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = xoj(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(xoj(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(xoj(dir.path(), &["ingest", "--in", "missing.csv", "--config", "missing.cfg"]).status.code(), Some(1));
    assert_eq!(xoj(dir.path(), &["simulate", "--preset", "nonexistent", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(xoj(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_log_exits_with_one_and_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--preset", "mixed", "--students", "5", "--out", "log.csv"]);
    let mut text = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    text.push_str("zz,A1,not-a-time,success,1\n");
    std::fs::write(dir.path().join("bad.csv"), text).unwrap();
    let out = xoj(dir.path(), &["ingest", "--in", "bad.csv", "--config", "log.cfg", "--out", "d.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row"));
}

#[test]
fn evaluate_writes_json_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--preset", "deadline_rushers", "--students", "60", "--seed", "2", "--out", "log.csv"]);
    for model in ["nb", "tree"] {
        ok(d, &["evaluate", "--in", "log.csv", "--config", "log.cfg", "--model", model, "--folds", "5", "--out", "res"]);
    }
    let mut names: Vec<String> = std::fs::read_dir(d.join("res"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for ext in ["json", "csv", "svg"] {
        assert_eq!(names.iter().filter(|n| n.ends_with(ext)).count(), 2, "{names:?}");
    }
    for name in names.iter().filter(|n| n.ends_with(".csv")) {
        let csv = std::fs::read_to_string(d.join("res").join(name)).unwrap();
        assert!(csv.starts_with("model,fold,auc,baseline_auc\n"));
        assert_eq!(csv.lines().count(), 7);
    }
    ok(d, &["compare", "--results", "res", "--out", "cmp"]);
    let cmp = std::fs::read_to_string(d.join("cmp/comparison.csv")).unwrap();
    assert_eq!(cmp.lines().count(), 3);
}

#[test]
fn grid_evaluation_writes_one_result_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--preset", "deadline_rushers", "--students", "40", "--seed", "3", "--out", "log.csv"]);
    ok(d, &["evaluate", "--in", "log.csv", "--config", "log.cfg", "--model", "knn", "--grid", "--folds", "4", "--out", "res"]);
    for k in [1, 3, 5, 7, 9, 11] {
        assert!(d.join(format!("res/knn_k{k}.json")).exists(), "k={k}");
    }
}

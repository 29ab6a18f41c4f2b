mod common;

use std::fs;
use std::process::{Command, Output};

use common::manifest_path;

fn stepsql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stepsql")).args(args).output().expect("binary runs")
}

fn path(rel: &str) -> String {
    manifest_path(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn build_writes_one_table_record_per_pair_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.jsonl");
    let corpus = path("tests/fixtures/formats/pairs.jsonl");
    let o = stepsql(&[
        "build",
        "--schema",
        &path("tests/fixtures/schema.json"),
        "--corpus",
        &corpus,
        "--subtask",
        "table",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pairs = fs::read_to_string(&corpus).unwrap().lines().filter(|l| !l.is_empty()).count();
    let records = fs::read_to_string(&out).unwrap().lines().count();
    // the fixture schema has two tables
    assert_eq!(records, pairs * 2);
    assert!(stdout(&o).contains(&format!("wrote {records} records")));
}

#[test]
fn unknown_subtask_is_a_usage_error() {
    let o = stepsql(&["build", "--schema", "s.json", "--corpus", "c.jsonl", "--subtask", "joins", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("joins"));
}

#[test]
fn missing_schema_is_reported() {
    let o = stepsql(&["ask", "--schema", "/nonexistent/schema.json", "total amount for Alice"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("stepsql: error:"));
    assert!(stderr(&o).contains("/nonexistent/schema.json"));
}

#[test]
fn ask_prints_sql() {
    let o = stepsql(&["ask", "--schema", &path("tests/fixtures/schema.json"), "total amount for Alice"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "select sum(amount) from power_bill where user_name = 'Alice'");
}

#[test]
fn ask_failure_names_the_stage() {
    let o = stepsql(&["ask", "--schema", &path("tests/fixtures/schema.json"), "zebra quartz"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("table-selection"), "{}", stderr(&o));
}

#[test]
fn augment_with_everything_off_copies_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aug.jsonl");
    let corpus = path("tests/fixtures/formats/pairs.jsonl");
    let o = stepsql(&[
        "augment",
        "--schema",
        &path("tests/fixtures/schema.json"),
        "--corpus",
        &corpus,
        "--out",
        out.to_str().unwrap(),
        "--no-keywords",
        "--no-paraphrase",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let original: Vec<serde_json::Value> =
        fs::read_to_string(&corpus).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let copied: Vec<serde_json::Value> =
        fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(copied, original);
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let o = stepsql(&[
            "synth",
            "--schema",
            &path("data/demo/schema.json"),
            "--n",
            "30",
            "--seed",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 30);
    assert!(dir.path().join("a.typo.jsonl").exists());
}

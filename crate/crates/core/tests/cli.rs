//! End-to-end runs of the `btq` binary.

use std::process::{Command, Output};

use btq::graph::QuotientGraph;
use btq::nmatrix::MatrixJson;

fn btq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btq")).args(args).env_remove("BTQ_THREADS").output().expect("spawn btq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn nmatrix_degree_one_json() {
    let o = btq(&["nmatrix", "--p", "2", "--deg", "1", "--window", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let js: MatrixJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(js.convention, "row-source");
    assert_eq!(js.entries[0][1], "3");
    assert_eq!(js.entries[3][2], "2");
    assert_eq!(js.entries[3][4], "1");
}

#[test]
fn nmatrix_both_agrees() {
    let o = btq(&["nmatrix", "--p", "2", "--deg", "2", "--window", "8", "--method", "both"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["recurrence"], v["oracle"]);
}

#[test]
fn invalid_configs_exit_2() {
    for args in [
        &["nmatrix", "--p", "2", "--deg", "0", "--window", "6"][..],
        &["nmatrix", "--p", "6", "--deg", "1", "--window", "6"],
        &["nmatrix", "--p", "2", "--deg", "3", "--window", "3"],
        &["nmatrix", "--p", "3", "--deg", "3", "--window", "8", "--method", "oracle", "--budget", "10"],
        &["graph", "--p", "2", "--deg", "4", "--window", "12", "--budget", "8"],
        &["ball", "--p", "2", "--start", "7", "--steps", "4:1", "--window", "8"],
        &["ball", "--p", "2", "--start", "7", "--steps", "4-1"],
        &["valency", "--type", "V", "--p", "2", "--n", "2"],
    ] {
        assert_eq!(btq(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn graph_outputs() {
    let o = btq(&["graph", "--p", "2", "--deg", "1", "--window", "4", "--format", "dot"]);
    assert_eq!(stdout(&o).matches(" -- ").count(), 3);

    let o = btq(&["graph", "--p", "2", "--deg", "2", "--window", "6", "--format", "json"]);
    let g = QuotientGraph::from_json(&stdout(&o)).unwrap();
    assert_eq!(g.components().len(), 2);

    let o = btq(&["graph", "--p", "2", "--deg", "5", "--window", "12", "--format", "dot", "--audit"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("D_0 -- D_1 [label=\"4\", kind=extra]"));

    let o = btq(&["graph", "--p", "2", "--deg", "2", "--window", "6", "--sgraph"]);
    let s = QuotientGraph::from_json(&stdout(&o)).unwrap();
    assert_eq!(s.vertices.len(), 12);
}

#[test]
fn closed_form_graph_matches() {
    let a = btq(&["graph", "--p", "3", "--deg", "4", "--window", "10"]);
    let b = btq(&["graph", "--p", "3", "--deg", "4", "--window", "10", "--method", "closed-form"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ball_examples() {
    assert_eq!(stdout(&btq(&["ball", "--p", "2", "--start", "7", "--steps", "4:1"])), "{3, 7, 11}\n");
    assert_eq!(stdout(&btq(&["ball", "--p", "2", "--start", "0"])), "{0}\n");
    let o = stdout(&btq(&["ball", "--p", "2", "--start", "7", "--steps", "4:1,5:1"]));
    for c in ["2", "3", "6", "7", "8", "11", "12", "16"] {
        assert!(o.trim_matches(|ch| ch == '{' || ch == '}' || ch == '\n').split(", ").any(|x| x == c), "{o}");
    }
}

#[test]
fn valency_query() {
    let o = btq(&["valency", "--type", "IV", "--p", "3", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valency 4\nburnside 4\n"));
}

#[test]
fn verify_suites() {
    let o = btq(&["verify", "--all", "--p", "2", "--maxdeg", "3", "--window", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = btq(&["verify", "--reciprocity", "--p", "3", "--deg1", "2", "--deg2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = btq(&["verify", "--fixtures"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("WARN figure d=4"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n2.json");
    let o = btq(&["nmatrix", "--p", "2", "--deg", "2", "--window", "8", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let js: MatrixJson = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(js.window, 8);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let missing = dir.path().join("no/such/dir/out.json");
    let o = btq(&["nmatrix", "--p", "2", "--deg", "2", "--window", "8", "--output", missing.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!missing.exists());
}

#[test]
fn deterministic_across_thread_counts() {
    let args = ["graph", "--p", "3", "--deg", "3", "--window", "12", "--format", "dot"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_btq")).args(args).env("BTQ_THREADS", threads).output().unwrap().stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("4"));
}

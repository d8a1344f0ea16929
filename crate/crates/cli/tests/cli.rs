use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn semialg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semialg")).current_dir(dir).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn regularity_example_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        r#"{"command":"regularity","family":"stripes","d":1,"D":4,"m":2000,"eps":"1/5"}"#,
    );
    let out = semialg(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["monomial_order"], semialg::MONOMIAL_ORDER);
    assert!(r["artifact_version"].is_string());
    assert!(r["timings"]["total_ms"].is_number());
    let err = semialg::rational::parse_rational(r["result"]["homogeneity"]["error"].as_str().unwrap()).unwrap();
    assert!(err <= semialg::rational::ratio(1, 5));
}

#[test]
fn reports_are_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"family":"random_points","d":2,"k":2,"n":40,"denom":64,"degree":2,"seed":3}"#,
    );
    let run = |w: &str| {
        String::from_utf8(semialg(dir.path(), &["turan", "--config", &cfg, "--workers", w, "--no-timings"]).stdout).unwrap()
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", r#"{"t":2,"k":1,"r":2,"seed":1}"#);
    let out = semialg(dir.path(), &["hardinstance", "--config", &cfg, "--set", "t=3", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["config"]["t"], 3);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["result"]["vertices"], 9);
    assert_eq!(r["result"]["pair_mismatches"], 0);
}

#[test]
fn validation_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = semialg(
        dir.path(),
        &["regularity", "--set", "family=grid", "--eps", "2", "--set", "bogus=1", "--set", "iterations=0"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    for needle in ["family", "eps", "iterations", "bogus"] {
        assert!(err.contains(needle), "missing {needle} in {err}");
    }
    assert!(out.stdout.is_empty());
}

#[test]
fn command_mismatch_and_unknown_suite_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"command":"turan"}"#);
    assert_eq!(semialg(dir.path(), &["regularity", "--config", &cfg]).status.code(), Some(2));
    let out = semialg(dir.path(), &["certificates", "--set", "suite=nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lower-bounds-default"));
}

#[test]
fn zarankiewicz_csv_has_one_row_per_rung() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.json", r#"{"command":"zarankiewicz","family":"point_line","u":2,"ladder":[32,64,128,256]}"#);
    let out = semialg(dir.path(), &["run", "--config", &cfg, "--csv", "z.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let e = report(&out)["summary"]["exponent"].as_f64().unwrap();
    assert!((1.0..=1.48).contains(&e), "{e}");
}

#[test]
fn points_files_load_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "p.csv", "# d=2\n1,2\n3/2,5\n");
    let out = semialg(dir.path(), &["unitdist", "--set", &format!("points_file={good}")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["result"]["points"], 2);
    assert_eq!(r["result"]["sq_scale"], "37/4");

    let empty = write(dir.path(), "e.csv", "# d=2\n");
    let out = semialg(dir.path(), &["equilateral", "--set", &format!("points_file={empty}")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&out)["result"]["count"], 0);

    let bad = write(dir.path(), "b.csv", "# d=2\n1,2\n3\n");
    let out = semialg(dir.path(), &["equilateral", "--set", &format!("points_file={bad}")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn partition_report_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let pts = semialg::hypergraph::families::random_points(60, 2, 64, 5).unwrap();
    let file = write(dir.path(), "p.csv", &pts.to_csv());
    let out = semialg(dir.path(), &["partition", "--set", &format!("points_file={file}"), "--set", "a=3", "--csv", "cells.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let c: semialg::partition::CellPartition = serde_json::from_value(report(&out)["result"].clone()).unwrap();
    c.check_invariants().unwrap();
    let direct =
        semialg::partition::build_partition(&pts, &semialg::partition::PartitionParams::new(semialg::rational::int(3))).unwrap();
    assert_eq!(c, direct);
    let rows = std::fs::read_to_string(dir.path().join("cells.csv")).unwrap();
    assert_eq!(rows.lines().count(), 61);
}

#[test]
fn ramsey_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let out = semialg(dir.path(), &["ramsey", "--set", "family=grid", "--set", "d=2", "--set", "m=8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert!(r["result"]["set"].as_array().unwrap().len() >= 3);

    let tester = write(
        dir.path(),
        "t.json",
        r#"{"task":"tester","host":"threshold","n":100,"seed":3,"eps":"1/10","trials":50,"queries":300,"expect":"reject"}"#,
    );
    let out = semialg(dir.path(), &["ramsey", "--config", &tester]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["summary"]["rejection_rate"], 1.0);
    assert!(r["result"]["far_certificate"]["removals"].as_u64().unwrap() > 0);

    let free = semialg(
        dir.path(),
        &["ramsey", "--config", &tester, "--set", "host=split_bipartite", "--set", "expect=reject"],
    );
    assert_eq!(free.status.code(), Some(1));
}

#[test]
fn proptest_command_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = semialg(dir.path(), &["proptest", "--set", "cases=4", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&out)["summary"]["failures"], 0);
}

#[test]
fn sweep_runs_every_combination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"base":{"command":"regularity","family":"stripes","d":1,"m":300,"eps":"1/4"},"vary":{"D":[2,4],"eps":["1/4","1/2"]}}"#,
    );
    let out = semialg(dir.path(), &["sweep", "--config", &cfg, "--csv", "s.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&out)["result"]["runs"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("D,eps,passed,"));
    assert_eq!(csv.lines().count(), 5);

    let bad = write(dir.path(), "b.json", r#"{"base":{"command":"regularity","family":"stripes","d":1,"m":300},"vary":{"eps":["1/4","7"]}}"#);
    let out = semialg(dir.path(), &["sweep", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("run 1: eps"), "{}", stderr(&out));
}

#[test]
fn certificates_suite_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"command":"certificates","suite":"lower-bounds-default","expansion_sets":3,"spacing_max_k":4,"symdiff_pairs":4}"#,
    );
    let out = semialg(dir.path(), &["run", "--config", &cfg, "--csv", "v.csv", "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["summary"]["failed"], 0);
    let n = r["summary"]["verdicts"].as_u64().unwrap() as usize;
    assert_eq!(std::fs::read_to_string(dir.path().join("v.csv")).unwrap().lines().count(), n + 1);
}

#[test]
fn echoed_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = semialg(
        dir.path(),
        &["regularity", "--set", "family=grid", "--set", "d=2", "--set", "m=6", "--set", "a=2", "--eps", "1/2", "--no-timings"],
    );
    assert_eq!(first.status.code(), Some(1), "{}", stderr(&first));
    let r = report(&first);
    let cfg = write(dir.path(), "echo.json", &r["config"].to_string());
    let again = semialg(dir.path(), &["run", "--config", &cfg, "--no-timings"]);
    assert_eq!(again.stdout, first.stdout);
}

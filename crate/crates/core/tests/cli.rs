mod common;

use std::process::{Command, Output};

use common::crate_path;

fn qltl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qltl"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const EXAMPLE: &str = "models/running_example.cqm";

#[test]
fn check_merging_nodes() {
    let base = ["check", EXAMPLE, "--trace", "sigma", "--formula", "<> (x = y)", "--assign", "x=n0,y=n2"];
    let o = qltl(&base);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("sat"));
    let mut with_pnf = base.to_vec();
    with_pnf.push("--pnf");
    assert_eq!(qltl(&with_pnf).status.code(), Some(0));
    // e1 is dropped after one step while e0 lives on
    let o = qltl(&["check", EXAMPLE, "--formula", "<> (x = y)", "--assign", "x=e0,y=e1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_replays_later_positions() {
    let o = qltl(&["check", EXAMPLE, "--pos", "2", "--formula", "s(x) = t(x)", "--assign", "x=e5"]);
    assert_eq!(o.status.code(), Some(0));
    let o = qltl(&["check", EXAMPLE, "--pos", "1", "--formula", "s(x) = t(x)", "--assign", "x=e5"]);
    assert_eq!(o.status.code(), Some(2), "e5 is not in the world at position 1");
}

#[test]
fn check_rejects_bad_assignments() {
    let o = qltl(&["check", EXAMPLE, "--formula", "O x = y", "--assign", "x=n0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qltl(&["check", EXAMPLE, "--formula", "O true", "--assign", "x=n0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qltl(&["check", EXAMPLE, "--formula", "O (", "--assign", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
    let o = qltl(&["check", "no-such-file.cqm", "--formula", "true"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_json_is_one_stable_line() {
    let o = qltl(&[
        "check", EXAMPLE, "--formula", "(exists E e . s(e) = x & s(e) = t(e)) U false", "--assign", "x=n0", "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["assignment", "formula", "mode", "pos", "satisfied", "trace", "witness_step"]);
    assert_eq!(v["satisfied"], false);
    assert!(out.find("\"satisfied\"").unwrap() < out.find("\"trace\"").unwrap());

    let o = qltl(&["check", EXAMPLE, "--formula", "true U (s(x) = t(x))", "--assign", "x=e0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["witness_step"], 2);
}

#[test]
fn pnf_command() {
    let cases = [
        ("!(O true)", "", "A !true"),
        ("true", "", "true"),
        ("!(B(x) U R(x))", "x:N", "(!R(x)) T ((!B(x)) & (!R(x)))"),
        ("!(B(x) W R(x))", "x:N", "(!R(x)) F ((!B(x)) & (!R(x)))"),
    ];
    for (f, ctx, want) in cases {
        let o = qltl(&["pnf", "--formula", f, "--ctx", ctx]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), want);
    }
    assert_eq!(qltl(&["pnf", "--formula", "a U b U c"]).status.code(), Some(2));
    assert_eq!(qltl(&["pnf", "--formula", "B(x)"]).status.code(), Some(2));
}

#[test]
fn difftest_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fail.cqm");
    let o = qltl(&["difftest", "--models", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 models"));
    let o = qltl(&["difftest", "--models", "30", "--depth", "3", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = qltl(&["difftest", "--functional", "--models", "30", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("then-expansion"));
    assert!(!out.exists());
}

#[test]
fn counterexamples_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = qltl(&["counterexamples", "--budget", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not found"));
    assert_eq!(qltl(&["counterexamples", "--functional"]).status.code(), Some(2));
    assert_eq!(qltl(&["counterexamples", "--budget", "nope"]).status.code(), Some(2));
}

#[test]
fn replay_command() {
    let example = crate_path(EXAMPLE);
    let o = qltl(&["replay", example.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("32 directives, 0 failed"));
}

use std::fs;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Vec<Value>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = ccg_cli::run(std::iter::once("ccg").chain(args.iter().copied()), &mut out, &mut err);
    let stdout = String::from_utf8(out).unwrap();
    let records = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("not JSON: {:?}: {}", l, e)))
        .collect();
    (code, records, String::from_utf8(err).unwrap())
}

fn last_of<'a>(records: &'a [Value], kind: &str) -> &'a Value {
    records.iter().rev().find(|r| r["type"] == kind).unwrap_or_else(|| panic!("no {} record", kind))
}

#[test]
fn chain_of_seven_has_132_derivations_in_one_class() {
    let (code, records, _) = run(&["enumerate", "--chain", "7"]);
    assert_eq!(code, 0);
    let e = last_of(&records, "enumeration");
    assert_eq!(e["count"], 132);
    assert_eq!(e["classes"], 1);
}

#[test]
fn backward_chain_with_trees() {
    let (code, records, _) = run(&["enumerate", "--chain", "4", "--backward", "--trees"]);
    assert_eq!(code, 0);
    assert_eq!(last_of(&records, "enumeration")["count"], 5);
    assert_eq!(records.iter().filter(|r| r["type"] == "tree").count(), 5);
}

#[test]
fn parse_with_a_lexicon_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.lex");
    fs::write(&path, "@goal s\nkim := np\nsleeps := s\\np\n").unwrap();
    let (code, records, _) = run(&["parse", "--lexicon", path.to_str().unwrap(), "kim", "sleeps"]);
    assert_eq!(code, 0);
    let r = last_of(&records, "result");
    assert_eq!(r["categories"], serde_json::json!(["s"]));
    assert!(records.iter().any(|r| r["type"] == "analysis" && r["word_index"] == 0));
}

#[test]
fn madly_needs_reveal() {
    let (code, records, _) = run(&["parse", "--bundled", "madly", "--policy", "eager", "--trace", "john loves mary madly"]);
    assert_eq!(code, 0);
    assert!(records.iter().any(|r| r["type"] == "event" && r["kind"] == "attached"));
    let (code, _, _) = run(&["parse", "--bundled", "madly", "--no-reveal", "--policy", "eager", "john loves mary madly"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_word_is_a_negative_result() {
    let (code, _, err) = run(&["parse", "--bundled", "madly", "john loves zork"]);
    assert_eq!(code, 1);
    assert!(err.contains("zork"), "{}", err);
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(run(&["parse"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["parse", "--lexicon", "/nonexistent/x.lex", "a"]).0, 2);
    assert_eq!(run(&["--config", "/nonexistent/c.toml", "enumerate", "--chain", "3"]).0, 2);
    assert_eq!(run(&["normalize", "--derivation", "x"]).0, 2);
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "policy = \"exhaustive\"\n").unwrap();
    let (code, records, _) = run(&["--config", path.to_str().unwrap(), "parse", "--bundled", "thinking", "john was thinking that bill had left"]);
    assert_eq!(code, 0);
    assert_eq!(last_of(&records, "result")["complete"], 132);
    fs::write(&path, "no_such_key = 1\n").unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap(), "enumerate", "--chain", "3"]).0, 2);
}

#[test]
fn normalize_contracts_a_redex() {
    let (code, records, _) = run(&["normalize", "--derivation", "((a:x/y >1 b:y/z) >0 c:z)"]);
    assert_eq!(code, 0);
    let r = last_of(&records, "normal_form");
    assert_eq!(r["steps"], 1);
    assert_eq!(r["category"], "x");
    assert_eq!(r["sigma_trace"], serde_json::json!([1, 0]));
}

#[test]
fn train_writes_a_usable_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("insults.model");
    let (code, records, _) = run(&["train", "--bundled", "insults", "-o", model.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(last_of(&records, "train")["sentences"], 24);
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("# k=2 threshold=3"));
    let (code, records, _) = run(&[
        "parse",
        "--bundled",
        "insults",
        "--policy",
        "exhaustive",
        "--model",
        model.to_str().unwrap(),
        "--trace",
        "the shouts hurt the young teacher",
    ]);
    assert_eq!(code, 0);
    assert!(records.iter().any(|r| r["type"] == "event" && r["kind"] == "discarded_viability" && r["word_index"] == 1));
}

#[test]
fn quick_check_passes() {
    let (code, records, _) = run(&["check", "--quick"]);
    assert_eq!(code, 0);
    assert_eq!(records.iter().filter(|r| r["type"] == "suite").count(), 6);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ccg");
    let ok = Command::new(bin).args(["enumerate", "--chain", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let out = String::from_utf8(ok.stdout).unwrap();
    for line in out.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
    let neg = Command::new(bin).args(["parse", "--bundled", "bcbc", "--policy", "eager", "--no-reveal", "p q r t u"]).output().unwrap();
    assert_eq!(neg.status.code(), Some(1));
    let usage = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

//! The command-line binary: exit codes, formats and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn coopkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopkit"))
        .args(args)
        .env("COOPKIT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    coopkit(args).status.code().expect("exit code")
}

#[test]
fn passing_commands_exit_zero() {
    assert_eq!(code(&["trees", "enum", "--max-set", "5"]), 0);
    assert_eq!(code(&["chains", "fiber", "--set", "3", "--max-n", "3", "--max-set", "3"]), 0);
    assert_eq!(code(&["verify", "graph", "--max-set", "3"]), 0);
    assert_eq!(code(&["verify", "dirgraph", "--max-set", "3"]), 0);
    assert_eq!(code(&["verify", "cdc", "--max-set", "3"]), 0);
    assert_eq!(code(&["verify", "custom", "--cooperad", &data("graph3.json"), "--max-set", "3"]), 0);
    assert_eq!(code(&["verify", "custom", &data("graph3.json"), "--max-set", "3"]), 0);
    assert_eq!(code(&["trees", "enum", "--n", "4"]), 0);
    assert_eq!(code(&["cosimplicial", "graph", "--max-n", "3", "--max-set", "3"]), 0);
    assert_eq!(code(&["coalgebra", "verify", "--coalgebra", &data("coalgebra_gr.json")]), 0);
    assert_eq!(
        code(&["compose", "eval", "--seq", &data("seq_a.json"), "--seq", &data("seq_b.json"), "--max-arity", "3", "--oracle"]),
        0
    );
}

#[test]
fn violations_exit_one() {
    for c in ["sign-flip", "dropped-zero-case", "wrong-counit"] {
        assert_eq!(code(&["verify", "graph", "--max-set", "4", "--corrupt", c, "--seed", "3"]), 1, "{c}");
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // Sending x to y in arity 1 breaks the counit.
    let text = std::fs::read_to_string(data("coalgebra_gr.json"))
        .unwrap()
        .replace("[[0, 0, 1], [1, 1, 1]]", "[[1, 0, 1], [1, 1, 1]]");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(code(&["coalgebra", "verify", "--coalgebra", &bad.to_string_lossy()]), 1);
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(code(&["verify"]), 2);
    assert_eq!(code(&["verify", "nonsense"]), 2);
    assert_eq!(code(&["verify", "custom"]), 2);
    assert_eq!(code(&["verify", "custom", "--cooperad", "/nonexistent.json"]), 2);
    assert_eq!(code(&["verify", "custom", &data("graph3.json"), "--cooperad", &data("graph3.json")]), 2);
    assert_eq!(code(&["trees", "enum", "--n", "0"]), 2);
    assert_eq!(code(&["verify", "dirgraph", "--corrupt", "wrong-counit"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"symseq\": 1}").unwrap();
    assert_eq!(code(&["verify", "custom", "--cooperad", &bad.to_string_lossy()]), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_coopkit"))
        .args(["trees", "enum"])
        .env("COOPKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_json_parses() {
    let args = ["verify", "graph", "--max-set", "3", "--format", "json"];
    let a = coopkit(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_coopkit"))
        .args(args)
        .env("COOPKIT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().all(|e| e["status"] == "pass"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trees.json");
    let out = coopkit(&["trees", "enum", "--max-set", "4", "--list", "--format", "json", "--out", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["counts"][3]["count"], 16);
    assert_eq!(v["counts"][2]["trees"][0], "1 2 3; 1-2 1-3");
}

#[test]
fn trees_of_one_size_are_listed() {
    let out = coopkit(&["trees", "enum", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let counts = v["counts"].as_array().unwrap();
    assert_eq!(counts.len(), 1);
    assert_eq!(counts[0]["trees"].as_array().unwrap().len(), 16);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn summa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_summa"))
        .args(args)
        .env_remove("SUMMA_OUT_DIR")
        .output()
        .expect("spawn summa")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn verdict(v: &Value) -> &str {
    v["verdict"]["verdict"].as_str().unwrap_or("?")
}

#[test]
fn cesaro_is_regular() {
    let o = summa(&["check", "--matrix", "cesaro", "--cond", "S1,S2,S3", "--max-n", "20000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["command"], "check");
    assert_eq!(verdict(&v), "satisfied");
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn density_of_squares() {
    let o = summa(&["density", "--set", "squares", "--ideal", "z", "--max-n", "1000000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["estimate"]["value"].as_f64(), Some(0.002));
    assert_eq!(verdict(&v), "satisfied");
}

#[test]
fn evens_are_not_density_zero() {
    let o = summa(&["density", "--set", "evens", "--max-n", "10000"]);
    assert_eq!(code(&o), 1);
    assert_eq!(verdict(&json(&o)), "violated");
}

#[test]
fn counterexample_b_violates_t3_with_intact_blocks() {
    let o = summa(&["construct", "--counterexample", "B", "--max-block", "6", "--verify"]);
    let v = json(&o);
    assert_eq!(v["t3"]["verdict"]["verdict"], "violated");
    assert_eq!(v["invariants"]["failures"].as_array().unwrap().len(), 0);
    let expected = if v["behavesAsConstructed"] == Value::Bool(true) { 0 } else { 1 };
    assert_eq!(code(&o), expected);
}

#[test]
fn construct_without_verify_lists_blocks() {
    let o = summa(&["construct", "--counterexample", "A", "--max-block", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let blocks = v["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 5);
    let lambdas: Vec<u64> = blocks.iter().map(|b| b["lambda"].as_u64().unwrap()).collect();
    assert_eq!(lambdas, [0, 1, 3, 5, 7]);
}

#[test]
fn witness_for_pick_nth() {
    let o = summa(&["witness", "--matrix", "pick-nth", "--max-n", "20000", "--steps", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!json(&o)["trace"]["steps"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&summa(&["frobnicate"])), 64);
    assert_eq!(code(&summa(&["density"])), 64);
    assert_eq!(code(&summa(&["density", "--set", "squares", "--eps", "0.1,0.5"])), 64);
    assert_eq!(code(&summa(&["density", "--set", "squares", "--threads", "0"])), 64);
}

#[test]
fn help_exits_zero() {
    let o = summa(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("density"));
}

#[test]
fn missing_input_exits_66() {
    let o = summa(&["check", "--matrix", "file:/nonexistent/matrix.jsonl"]);
    assert_eq!(code(&o), 66);
    assert!(stderr(&o).contains("/nonexistent/matrix.jsonl"));
}

#[test]
fn malformed_input_exits_65_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.jsonl");
    fs::write(&path, "{\"row\": 1, \"entries\": [[1, 1.0]]}\nnot json\n").unwrap();
    let spec = format!("file:{}", path.display());
    let o = summa(&["check", "--matrix", &spec]);
    assert_eq!(code(&o), 65);
    assert!(stderr(&o).contains("broken.jsonl"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_73() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("report.json");
    let o = summa(&["density", "--set", "squares", "--max-n", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 73);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let args = ["check", "--matrix", "counterexample-b", "--max-block", "6", "--cond", "T1,T2,T3", "--e", "squares"];
    let one = summa(&[&args[..], &["--threads", "1"]].concat());
    let again = summa(&[&args[..], &["--threads", "1"]].concat());
    let eight = summa(&[&args[..], &["--threads", "8"]].concat());
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, eight.stdout);
    assert_eq!(code(&one), code(&eight));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_summa"))
        .args(["density", "--set", "squares", "--max-n", "1000000"])
        .env("SUMMA_OUT_DIR", dir.path().join("nested"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("nested/density.json")).unwrap()).unwrap();
    assert_eq!(written["command"], "density");
}

#[test]
fn csv_dump_of_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratios.csv");
    let o = summa(&["density", "--set", "squares", "--max-n", "1000000", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,n,ratio"));
    let last = lines.last().unwrap();
    assert_eq!(last, "set,1000000,0.001");
}

fn write_case(dir: &Path, sequence: &str) -> String {
    let path = dir.join("case.json");
    let body = serde_json::json!({"sequence": sequence, "family": ["squares"], "idealJ": "z"});
    fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn multiplier_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let ok = summa(&["multiplier", "--case", &write_case(dir.path(), "alt"), "--max-n", "100000"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert_eq!(json(&ok)["report"]["verdict"]["verdict"], "satisfied");

    let bad = summa(&["multiplier", "--case", &write_case(dir.path(), "square-spikes@1"), "--max-n", "20000"]);
    assert_eq!(code(&bad), 1);

    let missing = dir.path().join("absent.json");
    assert_eq!(code(&summa(&["multiplier", "--case", missing.to_str().unwrap()])), 66);

    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"sequence\": \"alt\"}").unwrap();
    assert_eq!(code(&summa(&["multiplier", "--case", junk.to_str().unwrap()])), 65);
}

#[test]
fn identity_permutation_is_consistent() {
    let o = summa(&["permute", "--perm", "identity", "--max-n", "100000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["verdict"]["verdict"], "satisfied");
}

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlcharges")).args(args).env("TLCHARGES_THREADS", "1").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn gen_csv_matches_q4_table() {
    let out = run(&["gen", "--k", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    let table = include_str!("../../core/fixtures/Q4.tsv");
    for line in table.lines().filter(|l| !l.starts_with('#')) {
        let (word, coeff) = line.split_once('\t').unwrap();
        assert!(rows.iter().any(|r| r.starts_with(&format!("{word},")) && r.ends_with(&format!(",{coeff}"))), "{line}");
    }
}

#[test]
fn gen_json_and_out_file() {
    let out = run(&["gen", "--k", "3"]);
    let v = json(&out);
    assert_eq!(v["k"], 3);
    let dir = std::env::temp_dir().join(format!("tlcharges-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q5.tex");
    let out = run(&["gen", "--k", "5", "--format", "tex", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().contains("\\begin{tabular}"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn numeric_exact_diagonal_twist() {
    let out = run(&["verify", "numeric", "--k", "3", "--L", "8", "--q", "3/2", "--twist", "diag:1/3", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["commutator_zero"], true);
}

#[test]
fn numeric_float_and_mutual() {
    let out = run(&["verify", "numeric", "--k", "3", "--against", "4", "--L", "9", "--q", "unit:1/5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&out)["relative_commutator"].as_f64().unwrap() < 1e-10);
}

#[test]
fn general_twist_reports_mismatch() {
    let out = run(&["verify", "numeric", "--k", "2", "--L", "8", "--q", "3/2", "--twist", "general:1,1,1,2", "--exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["gen"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--k", "2", "--format", "xml"]).status.code(), Some(2));
    let out = run(&["verify", "numeric", "--k", "5", "--L", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().starts_with("chain-too-short"));
    assert_eq!(run(&["verify", "numeric", "--k", "2", "--L", "6", "--twist", "general:1,2,3,4"]).status.code(), Some(2));
}

#[test]
fn symbolic_and_props() {
    let out = run(&["verify", "symbolic", "--k", "5"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["nonzero"], 0);
    let out = run(&["props", "triangle", "--max-k", "8"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["rows"][7]["words_of_length_k"], 128);
    let out = run(&["props", "identities", "--k", "5"]);
    assert!(out.status.success());
}

#[test]
fn oracles() {
    let out = run(&["oracle", "aseries", "--k", "4"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["mixing"][0], "tau");
    assert!(run(&["oracle", "boost", "--k", "4"]).status.success());
    let out = run(&["oracle", "transfer", "--k", "3", "--window", "11"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["densities"][0]["terms"][0]["word"], serde_json::json!([0]));
    assert_eq!(run(&["oracle", "transfer", "--k", "3", "--window", "9"]).status.code(), Some(2));
}

#[test]
fn relations_and_transfer() {
    let out = run(&["verify", "relations", "--L", "6", "--q", "7/3", "--exact"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["e_rho_e_checked"], true);
    let out = run(&["verify", "transfer", "--L", "6", "--q", "unit:1/5", "--k", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["tables"].as_array().unwrap().len(), 18);
}

use std::io::Write;
use std::process::Command;

use gppl::cli::{run, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;
use tempfile::NamedTempFile;

fn file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn gppl(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["gppl"];
    argv.extend_from_slice(args);
    let (code, out) = run(argv);
    let json = serde_json::from_str(&out).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {out}"));
    (code, json)
}

const TRIANGLE: &str = "let a = new() in let b = new() in let c = new() in edge(a,b) & edge(b,c) & edge(a,c)";
const HALF: &str = r#"{"kind":"constant","alpha":"1/2"}"#;

fn p_of(dist: &Value, value: &str) -> String {
    dist.as_array()
        .unwrap()
        .iter()
        .find(|o| o["value"] == value)
        .map(|o| o["p"].as_str().unwrap().to_string())
        .unwrap_or_else(|| "0/1".into())
}

#[test]
fn eval_symbolic_triangle() {
    let prog = file(TRIANGLE);
    let g = file(HALF);
    let (code, out) = gppl(&["eval", "--program", prog.path().to_str().unwrap(), "--graphon", g.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(p_of(&out["dist"], "true"), "1/8");
    assert_eq!(p_of(&out["dist"], "false"), "7/8");
    assert!(out.get("normal_form").is_none());
}

#[test]
fn eval_dumps_normal_form_on_request() {
    let g = file(HALF);
    let (code, out) = gppl(&[
        "eval",
        "--expr",
        "let a = new() in let b = new() in edge(a, b)",
        "--graphon",
        g.path().to_str().unwrap(),
        "--dump-normal-form",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out["normal_form"].as_array().unwrap().len(), 2);
}

#[test]
fn eval_exact_on_finite_model() {
    let m = file(r#"{"m":2,"new":["1/2","1/2"],"edge":[[true,false],[false,true]]}"#);
    let (code, out) = gppl(&["eval", "--expr", TRIANGLE, "--impl", m.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(p_of(&out["dist"], "true"), "1/4");
}

#[test]
fn usage_and_type_errors_exit_two_with_json() {
    let g = file(HALF);
    let gp = g.path().to_str().unwrap();
    assert_eq!(gppl(&["eval", "--expr", "let a = in", "--graphon", gp]).0, EXIT_USAGE);
    assert_eq!(gppl(&["eval", "--expr", "new()", "--graphon", gp]).0, EXIT_USAGE);
    assert_eq!(gppl(&["eval", "--expr", "edge((), ())", "--graphon", gp]).0, EXIT_USAGE);
    assert_eq!(gppl(&["eval", "--expr", "true"]).0, EXIT_USAGE);
    assert_eq!(gppl(&["fubini", "--alpha", "3/2", "--beta", "1/2"]).0, EXIT_USAGE);
    assert_eq!(gppl(&["no-such-command"]).0, EXIT_USAGE);
    let bad = file(r#"{"kind":"step","weights":["1/2","1/3"],"matrix":[["0","0"],["0","0"]]}"#);
    let (code, out) = gppl(&["rgm", "--graphon", bad.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out["error"].is_string());
}

#[test]
fn rgm_checks_pass_for_step_graphon() {
    let g = file(r#"{"kind":"step","weights":["1/3","2/3"],"matrix":[["1/2","1/4"],["1/4","3/4"]]}"#);
    let (code, out) = gppl(&["rgm", "--graphon", g.path().to_str().unwrap(), "--n", "3", "--check", "all"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out["verdict"], "PASS");
    assert_eq!(out["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn check_laws_reports_model_axiom_failures() {
    let (code, out) = gppl(&["check-laws", "--count", "10", "--seed", "1"]);
    assert_eq!(code, EXIT_FAIL);
    let laws = out["laws"].as_array().unwrap();
    let self_loop = laws.iter().find(|l| l["law"] == "self-loop").unwrap();
    assert_eq!(self_loop["failed"], 1);
    let comm = laws.iter().find(|l| l["law"] == "let-comm").unwrap();
    assert_eq!(comm["failed"], 0);

    let (code, _) = gppl(&["check-laws", "--count", "10", "--law", "let-comm"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(gppl(&["check-laws", "--law", "no-such-law"]).0, EXIT_USAGE);
}

#[test]
fn fubini_edge_counterexample_exits_zero() {
    let (code, out) = gppl(&["fubini", "--alpha", "1/4", "--beta", "3/4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out["xy"], "1/4");
    assert_eq!(out["yx"], "3/4");
    assert_eq!(out["equal"], false);
}

#[test]
fn cross_check_and_sample() {
    let g = file(HALF);
    let gp = g.path().to_str().unwrap();
    let (code, out) = gppl(&["cross-check", "--expr", TRIANGLE, "--graphon", gp, "--trials", "20000", "--seed", "3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out) = gppl(&["sample", "--expr", TRIANGLE, "--graphon", gp, "--trials", "1000"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out["trials"], 1000);
}

#[test]
fn rado_er_agrees() {
    let (code, out) = gppl(&["rado-er", "--alpha", "1/3", "--n", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out["equal"], true);
}

#[test]
fn binary_prints_json_and_sets_status() {
    let out = Command::new(env!("CARGO_BIN_EXE_gppl"))
        .args(["fubini", "--alpha", "1/2", "--beta", "1/2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["equal"], true);

    let out = Command::new(env!("CARGO_BIN_EXE_gppl")).args(["eval", "--expr", "("]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(!out.stderr.is_empty());
    serde_json::from_slice::<Value>(&out.stdout).unwrap();
}

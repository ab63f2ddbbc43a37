//! End-to-end tests of the compiled binary: exit codes, output formats,
//! registry replacement, script files, and chain caching.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monodromy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_exits_zero_and_mentions_flagged_row() {
    let out = run(&["validate", "--sweep", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("gamma2span.c_5.variant"));
    assert!(text.contains("result: ok"));
}

#[test]
fn order_with_adjoined_twist_reports_full_group() {
    let out = run(&["order", "--gens", "xi(0,0)", "--extra", "d", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = json["sections"][0]["rows"].as_array().unwrap();
    let order = rows
        .iter()
        .find(|r| r["name"] == "order")
        .and_then(|r| r["value"].as_str())
        .unwrap();
    assert_eq!(order, "24815256521932800");
}

#[test]
fn distinguish_json_names_graph_and_letter() {
    let out = run(&["distinguish", "0,0", "1,0", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("gamma2"));
    assert!(text.contains("Phi(0,0)(B_1)"));
}

#[test]
fn distinguish_same_parity_reports_no_certificate() {
    let out = run(&["distinguish", "0,0", "2,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no certificate at this invariant level"));
}

#[test]
fn usage_error_exits_two() {
    let out = run(&["euler", "xi(1)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("xi expects 2 arguments"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_verification_exits_one_and_names_the_item() {
    // a script whose expectation is wrong: runs fine, fails verification
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
version = "1"
name = "bad-expectation"
start = "xi(0,0)"
expect = "xi(1,0)"
"#,
    )
    .unwrap();
    let out = run(&["script", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("verification failed"), "stderr: {err}");
    assert!(err.contains("final letter classes match expectation"));
}

#[test]
fn broken_registry_fails_validation() {
    // redefine d as a_1: the validate command must exit 1 and name a failing row
    let dir = tempfile::tempdir().unwrap();
    let base = monodromy::surface::CurveRegistry::builtin();
    let broken = base.with_curve("d", base.get("a_1").unwrap().clone());
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken.to_toml_string()).unwrap();
    let out = run(&["validate", "--registry", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL]"));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("phi01.B_4"), "stderr: {err}");
}

#[test]
fn missing_curve_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let base = monodromy::surface::CurveRegistry::builtin();
    let broken = base.without_curve("B_5");
    let path = dir.path().join("missing.toml");
    std::fs::write(&path, broken.to_toml_string()).unwrap();
    let out = run(&["validate", "--registry", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("B_5"), "stderr must name the curve: {err}");
}

#[test]
fn shipped_script_emits_and_replays_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y_reduce_1_0.toml");
    let out = run(&[
        "script",
        "--shipped",
        "y-reduce",
        "-p",
        "1",
        "-q",
        "0",
        "--emit",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    // the emitted document replays identically through --file
    let out2 = run(&["script", "--file", path.to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(0), "{}", stdout(&out2));
    assert!(stdout(&out2).contains("verified at the mod-2 class level"));
}

#[test]
fn chain_cache_is_recorded_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let out = run(&["order", "--gens", "eta^2", "--cache", cache, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let events = json["cache_events"][0].as_str().unwrap();
    assert!(events.contains("cache miss, stored"), "{events}");

    let out2 = run(&["order", "--gens", "eta^2", "--cache", cache, "--format", "json"]);
    let json2: serde_json::Value = serde_json::from_str(&stdout(&out2)).unwrap();
    let events2 = json2["cache_events"][0].as_str().unwrap();
    assert!(events2.contains("cache hit"), "{events2}");
    assert_eq!(
        json["sections"][0]["rows"][0]["value"],
        json2["sections"][0]["rows"][0]["value"]
    );
}

#[test]
fn cache_env_variable_supplies_default_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["order", "--gens", "eta", "--format", "json"])
        .env("MONODROMY_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["cache_events"][0]
        .as_str()
        .unwrap()
        .contains("cache miss, stored"));
}

#[test]
fn chitable_csv_has_quoted_fields() {
    let out = run(&["chitable", "--graph", "gamma1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("section,name,value,pass"));
    assert!(text.contains("\"Phi(0,0)(B_0)\""));
}

#[test]
fn registry_command_reports_solver_output() {
    let out = run(&["registry"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("registry d is a solution"));
    assert!(text.contains("a_1+a_2"));
}

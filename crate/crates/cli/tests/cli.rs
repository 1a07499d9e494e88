use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anchorcheck"))
}

fn here(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("ANCHORCHECK_MAX_NODES").output().unwrap()
}

fn fixture(name: &str) -> String {
    here(&format!("fixtures/{}", name)).display().to_string()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(here(&format!("golden/{}", name))).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn oscillator_check_matches_golden() {
    let o = run(&["check", &fixture("oscillator.model"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("oscillator.check.json"));
}

#[test]
fn failing_characteristic_exits_one() {
    let o = run(&["check", &fixture("oscillator_bad.model"), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), golden("oscillator_bad.check.json"));
}

#[test]
fn only_filter_and_unknown_check() {
    let o = run(&["check", &fixture("oscillator.model"), "--only", "characteristic,schouten"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("characteristic[0]") && text.contains("schouten"));
    assert!(!text.contains("symmetry[0]"));
    let o = run(&["check", &fixture("oscillator.model"), "--only", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown check `nonsense`"));
}

#[test]
fn syntax_error_is_positioned() {
    let o = run(&["check", &fixture("syntax_error.model")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:10:"));
}

#[test]
fn missing_file_and_bad_usage() {
    assert_eq!(run(&["check", &fixture("nope.model")]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["catalog", "pform", "--xi", "boost"]).status.code(), Some(2));
    assert_eq!(run(&["catalog", "chiral", "--algebra", "e8"]).status.code(), Some(2));
}

#[test]
fn rigid_body_suite_passes() {
    let o = run(&["check", &fixture("rigid_body.model")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn oracle_golden_and_advisory_drift() {
    let o = run(&["oracle", &fixture("oscillator.model"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("oscillator.oracle.json"));
    let o = run(&["oracle", &fixture("oscillator_bad.model"), "--t-end", "10", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"][0]["status"], "SKIP");
    assert_eq!(v["seed"], 1);
}

#[test]
fn oracle_is_deterministic_per_seed() {
    let args = ["oracle", &fixture("rigid_body.model"), "--t-end", "5", "--seed", "9", "--json"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn search_finds_the_quadratic_invariants() {
    let o = run(&["search", &fixture("rigid_body.model"), "--degree", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["basis"].as_array().unwrap().len(), 2);
    assert_eq!(run(&["search", &fixture("rigid_body.model"), "--degree", "99"]).status.code(), Some(2));
}

#[test]
fn catalog_goldens() {
    let o = run(&["catalog", "selfdual", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("selfdual.catalog.json"));
    let o = run(&["catalog", "chiral", "--json"]);
    assert_eq!(stdout(&o), golden("chiral_su2.catalog.json"));
}

#[test]
fn chiral_degenerate_limit_matches_abelian_records() {
    let su2 = run(&["catalog", "chiral", "--g", "0", "--json"]);
    let ab = run(&["catalog", "chiral", "--algebra", "abelian3", "--g", "0", "--json"]);
    let checks = |o: &Output| serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["checks"].to_string();
    assert_eq!(checks(&su2), checks(&ab));
}

#[test]
fn pform_catalog_flags() {
    let o = run(&["catalog", "pform", "--a", "2", "--b", "2", "--only", "triviality,anchor"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("trivial: V* = J o (a Id)"));
    let o = run(&["catalog", "pform", "--n", "3", "--p", "1", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let traceless = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "energy_momentum.traceless").unwrap().clone();
    assert_eq!(traceless["status"], "SKIP");
}

#[test]
fn timings_fill_ms() {
    let o = run(&["check", &fixture("oscillator.model"), "--json", "--timings"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["checks"][0]["ms"].is_u64());
}

#[test]
fn node_cap_from_environment() {
    let o = bin()
        .args(["check", &fixture("oscillator.model")])
        .env("ANCHORCHECK_MAX_NODES", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("limit"));
}

#[test]
fn convention_sheet() {
    let o = run(&["--convention"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Hodge star"));
}

use std::path::PathBuf;

use assert_cmd::Command;
use serde_json::Value;

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::cargo_bin("iwasawa").unwrap().args(args).output().unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    (out.status.code().unwrap(), report)
}

#[test]
fn orbit_table_for_ell_2_p_3() {
    let (code, r) = run(&["orbits", "--ell", "2", "--p", "3", "--d", "1", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["orbit_count"], 3);
    let sizes: Vec<u64> = r["result"]["levels"].as_array().unwrap().iter().map(|l| l["f"].as_u64().unwrap()).collect();
    assert_eq!(sizes, [1, 2, 6]);
    assert_eq!(r["config"]["d"], 1);
}

#[test]
fn ell_equal_to_p_exits_2() {
    let (code, r) = run(&["orbits", "--ell", "3", "--p", "3", "--n", "1"]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "invalid_input");
}

#[test]
fn level_zero_has_one_orbit() {
    let (code, r) = run(&["orbits", "--ell", "5", "--p", "2", "--d", "2", "--n", "0"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["orbit_count"], 1);
}

#[test]
fn projective_line_zeta() {
    let (code, r) = run(&["zeta", "--curve", "P1", "--q", "5"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["zeta_numerator"]["coeffs"], serde_json::json!(["1"]));
    assert_eq!(r["result"]["class_number"], "1");
}

#[test]
fn elliptic_layers_from_json_curve() {
    let curve = data("curve_e5.json");
    let (code, r) = run(&["zeta", "--curve", &curve, "--p", "3", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["zeta_numerator"]["coeffs"], serde_json::json!(["1", "-2", "5"]));
    let h: Vec<&str> = r["result"]["layers"].as_array().unwrap().iter().map(|l| l["h"].as_str().unwrap()).collect();
    assert_eq!(h, ["4", "148", "1955524"]);
    assert_eq!(r["config"]["q"], 5);
}

#[test]
fn elliptic_imc_verify() {
    let (code, r) =
        run(&["imc-verify", "--curve", "weierstrass:0,0,0,1,0", "--q", "5", "--p", "3", "--ell", "2", "--n", "1"]);
    assert_eq!(code, 0);
    let x = &r["result"];
    assert_eq!(x["tower"], "arithmetic");
    assert_eq!(x["verdict"], "confirmed");
    let thetas: Vec<&str> = x["orbits"].as_array().unwrap().iter().map(|o| o["theta"].as_str().unwrap()).collect();
    assert_eq!(thetas, ["4", "37"]);
    assert_eq!(x["identity"]["raw_holds"], true);
    assert_eq!(x["identity"]["bridging_ratio"], "93");
    assert_eq!(r["config"]["set_s"], serde_json::json!(["deg:1"]));
    assert_eq!(r["config"]["truncation"], 11);
}

#[test]
fn raw_identity_mode() {
    let (code, r) = run(&[
        "imc-verify", "--curve", "P1", "--q", "5", "--p", "3", "--ell", "2", "--n", "1", "--set-S", "t", "--v0", "t-1",
        "--identity-mode", "raw",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["identity"]["lhs"], "1");
    assert_eq!(r["result"]["identity"]["rhs"], "1");
}

#[test]
fn carlitz_stickelberger() {
    let (code, r) = run(&["stickelberger", "--tower", "carlitz", "--q", "3", "--frak-p", "t", "--ell", "2", "--n", "2"]);
    assert_eq!(code, 0);
    let thetas: Vec<&str> =
        r["result"]["theta"]["orbits"].as_array().unwrap().iter().map(|o| o["theta"].as_str().unwrap()).collect();
    assert_eq!(thetas, ["1", "4"]);
    assert_eq!(r["config"]["v0"], "inf");
    assert_eq!(r["config"]["p"], 3);
}

#[test]
fn unknown_tower_exits_2() {
    let (code, _) = run(&["stickelberger", "--tower", "cyclotomic", "--q", "3", "--ell", "2", "--n", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn stable_order_limit() {
    let spec = data("sinnott_stable.json");
    let (code, r) = run(&["sinnott-limit", "--spec", &spec, "--kind", "order", "--pi", "8"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["modulus"], 6561);
    assert!(r["result"]["stabilized_at"].is_u64());
    assert_eq!(r["config"]["spec"]["ell"], 2);
}

#[test]
fn free_rank_limit_vanishes() {
    let spec = data("sinnott_free.json");
    let (code, r) = run(&["sinnott-limit", "--spec", &spec, "--kind", "rank_zl", "--pi", "10"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["value"], 0);
}

#[test]
fn order_limit_of_free_module_is_invalid() {
    let spec = data("sinnott_free.json");
    let (code, _) = run(&["sinnott-limit", "--spec", &spec, "--kind", "order", "--pi", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn normic_round_trip_and_mutant() {
    let spec = data("normic_small.json");
    let (code, r) = run(&["normic-check", "--spec", &spec]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["holds"], true);
    assert_eq!(r["result"]["components"].as_array().unwrap().len(), 3);

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    doc["down"][0][0][0] = Value::from(0);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let (code, r) = run(&["normic-check", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(r["result"]["holds"], false);
}

#[test]
fn malformed_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"ell\": 2, ").unwrap();
    let (code, r) = run(&["module-stats", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(r["result"]["error"].as_str().unwrap().contains("parse"));
}

#[test]
fn seeded_module_stats_are_byte_identical() {
    let args = ["module-stats", "--ell", "3", "--p", "2", "--n", "3", "--seed", "11"];
    let a = Command::cargo_bin("iwasawa").unwrap().args(args).arg("--jobs").arg("1").output().unwrap();
    let b = Command::cargo_bin("iwasawa").unwrap().args(args).arg("--jobs").arg("4").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::cargo_bin("iwasawa").unwrap().args(["module-stats", "--ell", "3", "--p", "2", "--n", "3", "--seed", "12"]).output().unwrap();
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let csv = dir.path().join("t.csv");
    let spec = data("sinnott_stable.json");
    let status = Command::cargo_bin("iwasawa")
        .unwrap()
        .args(["module-stats", "--spec", &spec, "--n", "2", "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["levels"].as_array().unwrap().len(), 3);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("level,f,r,rho,t"));
}

#[test]
fn report_header_carries_versions() {
    let (_, r) = run(&["orbits", "--ell", "2", "--p", "3", "--n", "1"]);
    assert_eq!(r["tool"], "iwasawa");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert!(r["core_version"].is_string());
}

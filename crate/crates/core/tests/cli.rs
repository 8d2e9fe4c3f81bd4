use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_measdisc"))
        .args(args)
        .env_remove("MEASDISC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn reproduce_json_is_deterministic() {
    let args = ["reproduce", "d-values", "--json", "--seed", "99", "--restarts", "20"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let rows: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let labels: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    let mut sorted = labels.clone();
    sorted.sort();
    assert_eq!(labels, sorted);
    assert!(rows[0].get("runtime_ms").is_none());
}

#[test]
fn seed_from_environment() {
    let via_flag = run(&["compute-d", "table1", "--json", "--restarts", "4", "--seed", "5"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_measdisc"))
        .args(["compute-d", "table1", "--json", "--restarts", "4"])
        .env("MEASDISC_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(via_flag.stdout, via_env.stdout);
}

#[test]
fn reproduce_closed_forms_passes() {
    let o = run(&["reproduce", "closed-forms"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 failed"));
    let csv = run(&["reproduce", "closed-forms", "--csv"]);
    assert!(stdout(&csv).starts_with("label,reference,computed,tolerance,pass,runtime_ms\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["validate", "table1"]).status.code(), Some(0));
    assert_eq!(run(&["validate", "weyl:2:mixing"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "no-such-tag"]).status.code(), Some(2));
    assert_eq!(run(&["compute-b", "ic:x"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "--restarts", "many"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn witness_json() {
    let o = run(&[
        "witness",
        "--state",
        "werner:0.9",
        "--ensemble",
        "trine",
        "--json",
        "--restarts",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "steerable-witnessed");
    assert!((v["b_value"].as_f64().unwrap() - 0.95).abs() < 1e-9);

    let o = run(&[
        "witness",
        "--state",
        "werner:0.6",
        "--ensemble",
        "trine",
        "--d-value",
        "0.8333333333333334",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "inconclusive");

    let o = run(&[
        "witness",
        "--state",
        "pure2q:0.3",
        "--ensemble",
        "trine",
        "--json",
        "--restarts",
        "10",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = (0.6f64).sin();
    let expected = (4.0 + (1.0 + 3.0 * c * c).sqrt()) / 6.0 - 5.0 / 6.0;
    assert!((v["gap"].as_f64().unwrap() - expected).abs() < 1e-6);
}

#[test]
fn compute_b_with_proof_measurements() {
    let o = run(&["compute-b", "table1", "--bob", "proof", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["method"], "exact-bob");
    assert_eq!(v["bob_povms"].as_array().unwrap().len(), 4);
}

#[test]
fn export_round_trips() {
    let o = run(&["export", "dplus1:3"]);
    assert_eq!(o.status.code(), Some(0));
    let ens = measdisc::measurements::MeasurementEnsemble::from_json(&stdout(&o)).unwrap();
    assert_eq!((ens.dim(), ens.settings(), ens.outcomes()), (3, 3, 4));
}

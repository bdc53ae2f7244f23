use std::path::Path;
use std::process::{Command, Output};

use cloneforge::groups::parse_group;
use cloneforge::io::StateSet;
use cloneforge::linalg::ComplexMatrix;
use cloneforge::states::{build_group_shifted, BipartitePureState, ShiftedSetSpec};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloneforge"))
        .env_remove("CLONEFORGE_TOL")
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_set(dir: &Path, name: &str, states: Vec<BipartitePureState>) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&StateSet::new(states).unwrap()).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn clone_sim_reports_and_exit_codes() {
    let ok = run(&["clone-sim", "--group", "Z2", "--weights", "0.7,0.3"]);
    assert_eq!(ok.status.code(), Some(0));
    let v = json(&ok);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert!(v["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);

    let bad = run(&["clone-sim", "--group", "Z2", "--copies", "2", "--weights", "0.4,0.1,0.3,0.2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["pass"], false);

    assert_eq!(run(&["clone-sim", "--group", "Z9x"]).status.code(), Some(1));
    assert_eq!(run(&["clone-sim", "--group", "Z3", "--weights", "1,2"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tolerance_flag_and_environment() {
    let args = ["clone-sim", "--group", "Z2", "--copies", "2", "--weights", "0.4,0.1,0.3,0.2"];
    let mut loose = args.to_vec();
    loose.extend(["--tol", "0.1"]);
    assert_eq!(run(&loose).status.code(), Some(0));
    let env = Command::new(env!("CARGO_BIN_EXE_cloneforge")).env("CLONEFORGE_TOL", "0.1").args(args).output().unwrap();
    assert_eq!(env.status.code(), Some(0));
    let mut negative = args.to_vec();
    negative.extend(["--tol", "-1"]);
    assert_eq!(run(&negative).status.code(), Some(1));
}

#[test]
fn check_set_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ShiftedSetSpec::simple(parse_group("Z3").unwrap(), vec![0.5, 0.3, 0.2]).unwrap();
    let z3 = write_set(dir.path(), "z3.json", build_group_shifted(&spec));
    let out = run(&["check-set", "--input", &z3]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["overall"], true);
    assert_eq!(v["failed_checks"], serde_json::json!([]));

    let mixed = write_set(
        dir.path(),
        "mixed.json",
        vec![
            BipartitePureState::maximally_entangled(2),
            BipartitePureState::new(ComplexMatrix::from_real(2, 2, &[0.0, 0.8f64.sqrt(), 0.2f64.sqrt(), 0.0])).unwrap(),
        ],
    );
    let out = run(&["check-set", "--input", &mixed]);
    assert_eq!(out.status.code(), Some(3));
    let failed = json(&out)["failed_checks"].clone();
    assert!(failed.as_array().unwrap().iter().any(|x| x == "equal_gconcurrence"));

    let l: f64 = 0.8;
    let qubit = write_set(
        dir.path(),
        "qubit.json",
        vec![
            BipartitePureState::from_schmidt_weights(&[l, 1.0 - l]).unwrap(),
            BipartitePureState::new(ComplexMatrix::from_real(2, 2, &[0.0, (1.0 - l).sqrt(), l.sqrt(), 0.0])).unwrap(),
        ],
    );
    let out = run(&["check-set", "--input", &qubit]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["qubit_form"]["outcome"], "accepted");

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["check-set", "--input", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn blank_bounds_and_sweep() {
    let out = run(&["blank-bounds", "--group", "Z3", "--weights", "0.5,0.3,0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["gamma_min_lower"].as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-10);
    assert!(v["gap"].as_f64().unwrap() > 0.0);

    let out = run(&["sweep", "--group", "Z2", "--grid", "coarse"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l0,l1,gamma_min_lower,entropy_gap"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demo.json");
    let to_file = run(&["demo", "--out", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), run(&["demo"]).stdout);
}

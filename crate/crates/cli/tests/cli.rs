use std::process::{Command, Output};

use qsteer::quantum::TwoQubitState;
use serde_json::Value;

fn qsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsteer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn radius_of(doc: &Value, dir: &str) -> f64 {
    doc["output"]["radii"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["direction"] == dir)
        .unwrap()["radius"]
        .as_f64()
        .unwrap()
}

#[test]
fn radius_table_row() {
    let out = qsteer(&["radius", "--theta", "0.775", "--eta", "0.989", "--analytic"]);
    assert!(out.status.success());
    let d = json(&out);
    assert_eq!(d["schema"], "qsteer.result/1");
    assert_eq!(d["output"]["class"], "two-way-asymmetric");
    let (ab, ba) = (radius_of(&d, "ab"), radius_of(&d, "ba"));
    assert!((ab - 1.398).abs() < 0.08 && ab >= ba);
    for r in d["output"]["radii"].as_array().unwrap() {
        assert!(r["analytic"]["difference"].as_f64().unwrap().abs() < 1e-6);
    }
}

#[test]
fn product_state_is_unsteerable() {
    let d = json(&qsteer(&["radius", "--theta", "0", "--eta", "0.8"]));
    for r in d["output"]["radii"].as_array().unwrap() {
        assert_eq!(r["radius"].as_f64(), Some(1.0));
        assert_eq!(r["steerable"], false);
    }
    assert_eq!(d["output"]["class"], "trivial-separable");
}

#[test]
fn state_file_matches_family_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.txt");
    std::fs::write(&path, TwoQubitState::family(0.536, 0.816).unwrap().to_text()).unwrap();
    let from_file = json(&qsteer(&["radius", "--state", path.to_str().unwrap()]));
    let family = json(&qsteer(&["radius", "--theta", "0.536", "--eta", "0.816"]));
    for dir in ["ab", "ba"] {
        assert!((radius_of(&from_file, dir) - radius_of(&family, dir)).abs() < 1e-9);
    }
}

#[test]
fn non_positive_state_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    // diag(1.2, -0.2, 0, 0)
    let mut lines = vec!["0 0"; 16];
    lines[0] = "1.2 0";
    lines[5] = "-0.2 0";
    std::fs::write(&path, lines.join("\n")).unwrap();
    let out = qsteer(&["radius", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive"));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(
        qsteer(&["radius", "--theta", "2", "--eta", "0.8"]).status.code(),
        Some(2)
    );
    assert_eq!(qsteer(&["radius", "--theta", "0.3"]).status.code(), Some(2));
    assert_eq!(
        qsteer(&["simulate", "--theta", "0.3", "--eta", "0.8", "--N", "-5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_csv_follows_analytic_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = qsteer(&[
        "sweep",
        "--theta",
        "0.442:0.775:2",
        "--eta",
        "0.5:0.989:4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["output"]["rows"], 8);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,eta,class,R_ab,R_ba"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (t, e): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let (c, x) = ((2.0 * t).cos().abs(), (2.0 * e - 1.0).abs());
        let expected = if x < 1e-12 {
            "trivial-separable"
        } else if c >= x {
            "one-way-ab"
        } else {
            "two-way-asymmetric"
        };
        assert_eq!(f[2], expected, "{line}");
        if f[2] == "two-way-asymmetric" {
            assert!(f[3].parse::<f64>().unwrap() > 1.0);
        }
    }
}

#[test]
fn sweep_without_out_prints_csv() {
    let out = qsteer(&["sweep", "--theta", "0.442:0.442:1", "--eta", "0.658:0.658:1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",one-way-ab,"), "{text}");
}

#[test]
fn lhsm_four_and_three_states() {
    let d = json(&qsteer(&["lhsm", "--theta", "0.442", "--eta", "0.658"]));
    let out = &d["output"];
    assert_eq!(out["lhsm_exists"], true);
    assert_eq!(out["model"]["states"].as_array().unwrap().len(), 4);
    assert!(out["model"]["max_norm"].as_f64().unwrap() <= 1.0 + 1e-12);
    assert_eq!(out["validation"]["passed"], true);

    let d = json(&qsteer(&["lhsm", "--theta", "0.328", "--eta", "0.629", "--singular"]));
    assert_eq!(d["output"]["model"]["states"].as_array().unwrap().len(), 3);
}

#[test]
fn lhsm_reports_super_quantum_ensemble_when_steerable() {
    let d = json(&qsteer(&[
        "lhsm",
        "--theta",
        "0.429",
        "--eta",
        "0.819",
        "--direction",
        "ab",
    ]));
    assert_eq!(d["output"]["lhsm_exists"], false);
    assert_eq!(d["output"]["model"]["super_quantum"], true);
    assert!(d["output"]["model"]["max_norm"].as_f64().unwrap() > 1.0);

    let d = json(&qsteer(&["lhsm", "--theta", "0.775", "--eta", "0.989"]));
    assert_eq!(d["output"]["lhsm_exists"], false);
}

#[test]
fn fidelity_floors_near_reference() {
    let d = json(&qsteer(&["fidelity", "--theta", "5pi/48", "--eta", "0.8"]));
    let out = &d["output"];
    assert!((out["f_bob"]["value"].as_f64().unwrap() - 0.9937).abs() < 0.002);
    assert!((out["f_alice"]["value"].as_f64().unwrap() - 0.9954).abs() < 0.002);
    assert_eq!(d["status"], "ok");
}

#[test]
fn starved_budget_exits_with_three_and_partial_document() {
    let out = qsteer(&["fidelity", "--theta", "5pi/48", "--eta", "0.8", "--budget", "4000"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["status"], "partial");
}

#[test]
fn simulate_is_byte_identical_and_writes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("counts.csv");
    let args = [
        "simulate",
        "--theta",
        "0.488",
        "--eta",
        "0.727",
        "--N",
        "1e6",
        "--seed",
        "7",
        "--counts-out",
        csv.to_str().unwrap(),
    ];
    let a = qsteer(&args);
    let b = qsteer(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let d = json(&a);
    assert_eq!(d["seed"], 7);
    let out = &d["output"];
    assert!(out["uncertainty_radius"]["radius"].as_f64() <= out["measured_radius"].as_f64());
    let counts = std::fs::read_to_string(csv).unwrap();
    assert!(counts.starts_with("setting,outcome,axis,counts\n"));
    assert_eq!(counts.lines().count(), 25);
}

#[test]
fn simulate_infinite_counts_is_exact() {
    let d = json(&qsteer(&[
        "simulate", "--theta", "0.488", "--eta", "0.727", "--N", "inf",
    ]));
    let out = &d["output"];
    assert_eq!(d["input"]["N"], "inf");
    let (nom, unc) = (
        out["nominal_radius"].as_f64().unwrap(),
        out["uncertainty_radius"]["radius"].as_f64().unwrap(),
    );
    assert!((nom - unc).abs() < 1e-3);
}

#[test]
fn thread_variable_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_qsteer"))
        .args(["radius", "--theta", "0.5", "--eta", "0.9"])
        .env("QSTEER_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

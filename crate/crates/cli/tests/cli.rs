use proptest::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_horizon-pmp"));
    c.env_remove("HORIZON_PMP_TMAX");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

// Coarse grid for suites whose tolerances do not depend on resolution.
const SMALL_GRID: &str = "1025";

#[test]
fn regulator_passes_full_example_suites() {
    let o = run(&["verify", "catalog:regulator", "--suite", "pmp,transversality,michel,sufficiency"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn regulator_writes_deterministic_artifacts() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        let o = run(&["verify", "catalog:regulator", "--suite", "pmp,transversality,michel", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "series.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs between runs");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d1.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"], "pass");
    let series = std::fs::read_to_string(d1.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), "t,x,u,p,H,gap");
}

#[test]
fn sequential_flag_gives_identical_report() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let base = ["verify", "catalog:nash_player1", "--grid-n", SMALL_GRID, "--out"];
    let mut a = base.to_vec();
    a.push(d1.path().to_str().unwrap());
    let mut b = base.to_vec();
    b.push(d2.path().to_str().unwrap());
    b.push("--sequential");
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    assert_eq!(std::fs::read(d1.path().join("report.json")).unwrap(), std::fs::read(d2.path().join("report.json")).unwrap());
}

#[test]
fn halkin_passes_with_abnormal_note() {
    let o = run(&["verify", "catalog:halkin", "--suite", "pmp", "--grid-n", SMALL_GRID]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("λ₀ = 0"), "{out}");
}

#[test]
fn weights_exit_codes() {
    let o = run(&["weights", "--nu", "exp:2", "--omega", "exp:1"]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e7 = r["entries"].as_array().unwrap().iter().find(|e| e["id"] == "E7").unwrap();
    assert_eq!(e7["verdict"], "fail");
    assert_eq!(code(&run(&["weights", "--nu", "exp:1", "--omega", "exp:2"])), 0);
}

#[test]
fn catalog_list_names_every_entry() {
    let o = run(&["catalog-list"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["catalog:regulator", "catalog:halkin", "catalog:resource", "catalog:truncation_pathology"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn horizon_flags_the_pathology() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["horizon", "catalog:truncation_pathology", "--horizons", "2,3,4", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("horizon.json")).unwrap()).unwrap();
    assert_eq!(v["hypothesis"]["pathology"], true);
    let csv = std::fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

fn write_csv(path: &Path, t: &[f64], v: impl Fn(f64) -> f64, dv: impl Fn(f64) -> f64) {
    let mut s = String::from("t,v_1,dv_1\n");
    for &t in t {
        writeln!(s, "{t:.17e},{:.17e},{:.17e}", v(t), dv(t)).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

/// Writes the regulator's optimal process with the control scaled by `scale`.
fn regulator_candidate(dir: &Path, scale: f64) -> (String, String) {
    let (x0, s) = (2.0, 2f64.sqrt());
    let (k, c) = (1.0 - s, -(1.0 + s) * x0 * scale);
    let t: Vec<f64> = (0..=4096).map(|i| 40.0 * i as f64 / 4096.0).collect();
    let (xp, up) = (dir.join("x.csv"), dir.join("u.csv"));
    write_csv(&xp, &t, |t| x0 * (k * t).exp(), |t| x0 * k * (k * t).exp());
    write_csv(&up, &t, |t| c * (k * t).exp(), |t| c * k * (k * t).exp());
    (xp.to_str().unwrap().to_string(), up.to_str().unwrap().to_string())
}

#[test]
fn imported_candidate_is_verified() {
    let d = tempfile::tempdir().unwrap();
    let (x, u) = regulator_candidate(d.path(), 1.0);
    let o = run(&["verify", "catalog:regulator", "--candidate-x", &x, "--candidate-u", &u, "--suite", "admissible,pmp"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let (x, u) = regulator_candidate(d.path(), 1.1);
    let o = run(&["verify", "catalog:regulator", "--candidate-x", &x, "--candidate-u", &u, "--suite", "admissible,pmp"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn configuration_errors_exit_3() {
    let cases: &[&[&str]] = &[
        &["verify", "catalog:nope"],
        &["verify"],
        &["verify", "catalog:regulator", "--problem", "catalog:halkin"],
        &["verify", "catalog:regulator", "--param", "zz=1"],
        &["verify", "catalog:regulator", "--param", "x0"],
        &["verify", "catalog:regulator", "--suite", "pmp,bogus"],
        &["verify", "catalog:regulator", "--tmax", "-1"],
        &["verify", "catalog:regulator", "--tol-gap", "0"],
        &["verify", "catalog:regulator", "--candidate-x", "x.csv"],
        &["verify", "catalog:regulator", "--candidate-x", "/nonexistent/x.csv", "--candidate-u", "/nonexistent/u.csv"],
        &["verify", "catalog:fishing", "--param", "rho=5"],
        &["weights", "--nu", "gauss:1", "--omega", "exp:1"],
        &["horizon", "catalog:regulator", "--horizons", "2,x"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(code(&o), 3, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn tmax_environment_variable_is_honoured() {
    let o = bin().args(["verify", "catalog:regulator"]).env("HORIZON_PMP_TMAX", "not-a-number").output().unwrap();
    assert_eq!(code(&o), 3);
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["verify", "catalog:regulator", "--suite", "pmp", "--out", d.path().to_str().unwrap()])
        .env("HORIZON_PMP_TMAX", "25")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let series = std::fs::read_to_string(d.path().join("series.csv")).unwrap();
    let last_t: f64 = series.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(last_t, 25.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_params_exit_3(key in "[a-z]{1,6}", val in "[a-z#%]{1,6}") {
        let kv = format!("{key}={val}");
        let o = run(&["verify", "catalog:regulator", "--param", &kv]);
        prop_assert_eq!(code(&o), 3);
    }

    #[test]
    fn malformed_suites_exit_3(s in "[a-z]{1,8}(,[a-z]{1,8}){0,2}") {
        let known = ["admissible", "pmp", "transversality", "michel", "normality", "sufficiency", "constrained"];
        prop_assume!(s.split(',').any(|p| !known.contains(&p)));
        let o = run(&["verify", "catalog:regulator", "--suite", &s]);
        prop_assert_eq!(code(&o), 3);
    }

    #[test]
    fn malformed_weight_specs_exit_3(kind in "[a-z]{2,7}", rate in -5.0f64..5.0) {
        prop_assume!(kind != "exp" && kind != "power" && kind != "weibull");
        let spec = format!("{kind}:{rate}");
        let o = run(&["weights", "--nu", &spec, "--omega", "exp:1"]);
        prop_assert_eq!(code(&o), 3);
    }
}

//! Every catalog entry reaches its expected verdict under its designated
//! suites with default parameters.

use horizon_pmp::catalog::{self, Params};
use horizon_pmp::report::to_json;
use horizon_pmp::spaces::{SampledFn, DEFAULT_TAIL_TOL};
use horizon_pmp::verify::{self, VerifyConfig};

fn check(name: &str, params: &Params) {
    let inst = catalog::get(name, params).unwrap();
    let cfg = VerifyConfig { suites: verify::designated_suites(&inst.meta), ..Default::default() };
    let out = verify::verify_entry(&inst, &cfg).unwrap();
    let failing: Vec<String> = out
        .report
        .checks
        .iter()
        .filter(|c| !c.verdict.is_pass())
        .map(|c| format!("{} {} {:?} {:?}", c.name, c.verdict, c.residual, c.notes))
        .collect();
    assert_eq!(out.report.summary, inst.meta.expected, "{name}: {failing:#?}");
}

#[test]
fn catalog_entries_reach_their_expected_verdicts() {
    for name in catalog::names() {
        check(name, &Params::new());
    }
}

#[test]
fn resource_case_a() {
    check("resource", &[("q".to_string(), 0.5)].into());
}

#[test]
fn reports_are_reproducible() {
    let inst = catalog::get("fishing", &Params::new()).unwrap();
    let cfg = VerifyConfig { suites: verify::designated_suites(&inst.meta), ..Default::default() };
    let a = to_json(&verify::verify_entry(&inst, &cfg).unwrap().report);
    let b = to_json(&verify::verify_entry(&inst, &cfg).unwrap().report);
    assert_eq!(a, b);
}

#[test]
fn reference_trajectory_survives_a_csv_file_round_trip() {
    let inst = catalog::get("regulator", &Params::new()).unwrap();
    let x = &inst.reference.as_ref().unwrap().x;
    let mut file = tempfile::NamedTempFile::new().unwrap();
    x.write_csv(file.as_file_mut()).unwrap();
    let back = SampledFn::read_csv(file.reopen().unwrap(), DEFAULT_TAIL_TOL).unwrap();
    assert_eq!(back.times(), x.times());
    for (a, b) in back.values().iter().zip(x.values()) {
        assert_eq!(a, b);
    }
}

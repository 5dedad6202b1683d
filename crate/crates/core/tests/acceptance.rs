//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use horizon_pmp::catalog::{self, Instance, Multipliers, Params, ResourceCaseC};
use horizon_pmp::constraints::{self, Atom, ConstrainedMultipliers, ConstraintMeasure};
use horizon_pmp::error::Result;
use horizon_pmp::extremal::{self, ControlSampler, MaxConditionTolerances, PontryaginData};
use horizon_pmp::horizonlab::{self, SwitchingOptions};
use horizon_pmp::problem::{self, CandidateProcess, ClosedForm, ControlProblem, ControlSet, ProblemSpec, StateConstraint, Vector};
use horizon_pmp::report::Verdict;
use horizon_pmp::spaces::{DecayMode, Grid, SampledFn};
use horizon_pmp::sufficiency::{self, SufficiencyConfig};
use horizon_pmp::verify::{self, Suite, VerifyConfig};
use horizon_pmp::weights::{check_properties_p2, check_properties_star, QuadratureConfig};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

/// Outcome of one criterion: pass flag and a one-line detail.
type Outcome = (bool, String);

fn entry(name: &str) -> Instance {
    catalog::get(name, &Params::new()).expect("catalog entry")
}

fn entry_with(name: &str, params: &[(&str, f64)]) -> Instance {
    let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog::get(name, &p).expect("catalog entry")
}

fn pontryagin(inst: &Instance) -> PontryaginData {
    match inst.multipliers.as_ref().expect("multipliers") {
        Multipliers::Pontryagin(pd) => pd.clone(),
        Multipliers::Constrained(cm) => PontryaginData::new(cm.lambda0, cm.p()).unwrap(),
    }
}

fn constrained(inst: &Instance) -> ConstrainedMultipliers {
    match inst.multipliers.as_ref().expect("multipliers") {
        Multipliers::Constrained(cm) => cm.clone(),
        Multipliers::Pontryagin(_) => panic!("{} has unconstrained multipliers", inst.name),
    }
}

fn reference(inst: &Instance) -> &CandidateProcess {
    inst.reference.as_ref().expect("reference process")
}

fn sup_error(f: &SampledFn, k: usize, exact: impl Fn(f64) -> f64) -> f64 {
    f.times().iter().zip(f.values()).map(|(&t, v)| (v[k] - exact(t)).abs()).fold(0.0, f64::max)
}

fn c1_regulator_adjoint() -> Result<Outcome> {
    let inst = entry("regulator");
    let cand = reference(&inst);
    let start = Instant::now();
    let p = extremal::adjoint_via_representation(&inst.problem, cand)?;
    let elapsed = start.elapsed().as_secs_f64();
    let s = 2f64.sqrt();
    let p0 = -2.0 * (1.0 + s);
    let e0 = (p.value(0)[0] - p0).abs();
    let emax = sup_error(&p, 0, |t| p0 * (-(1.0 + s) * t).exp());
    let ok = e0 <= 1e-6 && emax <= 1e-6 && elapsed < 1.0 && p.len() == 4096;
    Ok((ok, format!("p(0) error {e0:.2e}, sup error {emax:.2e}, N = {}, {elapsed:.3} s", p.len())))
}

fn c2_regulator_suite() -> Result<Outcome> {
    let inst = entry("regulator");
    let (pb, cand) = (&inst.problem, reference(&inst));
    let pd = pontryagin(&inst);
    let dyn_res = problem::check_dynamics_residual(pb, cand);
    let adj_res = extremal::adjoint_residual(pb, cand, &pd);
    let mc = extremal::max_condition_check(pb, cand, &pd, &ControlSampler::default(), &MaxConditionTolerances::default())?;
    let tr = extremal::transversality_check(pb, &pd, &[], DecayMode::P2, 1e-6)?;
    let weighted = tr.get("p_weighted").expect("weighted tail");
    let michel = extremal::michel_check(pb, cand, &pd, DecayMode::P2, 1e-6)?;
    let weights_ok = pb.nu.to_string() == "exp:3" && pb.omega.to_string() == "exp:2";
    let vals = [dyn_res, adj_res, mc.worst_gap, weighted.end_value, michel.end_value];
    let ok = weights_ok
        && vals.iter().all(|v| *v <= 1e-6)
        && mc.verdict.is_pass()
        && weighted.verdict.is_pass()
        && michel.verdict.is_pass();
    Ok((
        ok,
        format!(
            "ν = {}, ω = {}; dynamics {:.2e}, adjoint {:.2e}, gap {:.2e}, ‖p‖²/ν tail {:.2e}, |H| tail {:.2e}",
            pb.nu, pb.omega, vals[0], vals[1], vals[2], vals[3], vals[4]
        ),
    ))
}

fn c3_weight_table() -> Result<Outcome> {
    let quad = QuadratureConfig::default();
    let mut mismatches = Vec::new();
    let mut cells = 0;
    for ia in 1..=8 {
        let a = 0.5 * ia as f64;
        for rho in [0.5, 1.0, 1.5, 2.0] {
            let nu = format!("exp:{a}").parse()?;
            let omega = format!("exp:{rho}").parse()?;
            let pass = check_properties_p2(&nu, &omega, &quad).summary().is_pass();
            cells += 1;
            if pass != (a < 2.0 * rho) {
                mismatches.push(format!("(a={a}, ρ={rho})"));
            }
        }
    }
    Ok((mismatches.is_empty(), format!("{cells} cells, mismatches: {}", if mismatches.is_empty() { "none".into() } else { mismatches.join(" ") })))
}

fn c4_weibull() -> Result<Outcome> {
    let quad = QuadratureConfig::default();
    let nu = "power:2".parse()?;
    let omega = "weibull:0.5".parse()?;
    let p3 = check_properties_star(&nu, &omega, 3.0, &quad);
    let p2 = check_properties_star(&nu, &omega, 2.0, &quad);
    let ids: Vec<String> = (1..=7).map(|k| format!("E*{k}")).collect();
    let p3_ok = ids.iter().all(|id| p3.verdict(id) == Some(Verdict::Pass));
    let p2_e7 = p2.verdict("E*7");

    let inst = entry("weibull_harvest");
    let (pb, cand) = (&inst.problem, reference(&inst));
    let pd = pontryagin(&inst);
    let shape = sup_error(&cand.u, 0, |_| 1.0)
        .max(sup_error(&cand.x, 0, |t| 1.0 + (-t).exp()))
        .max(pd.p.sup_norm());
    let dyn_res = problem::check_dynamics_residual(pb, cand);
    let adj_res = extremal::adjoint_residual(pb, cand, &pd);
    let cfg = VerifyConfig { suites: verify::designated_suites(&inst.meta), ..Default::default() };
    let summary = verify::verify_entry(&inst, &cfg)?.report.summary;
    let ok = p3_ok && p2_e7 == Some(Verdict::Fail) && shape <= 1e-12 && dyn_res <= 1e-6 && adj_res <= 1e-6 && summary.is_pass();
    Ok((
        ok,
        format!(
            "p=3 E*1..E*7 all pass: {p3_ok}; p=2 E*7: {}; example: dynamics {dyn_res:.2e}, adjoint {adj_res:.2e}, suites {summary}",
            p2_e7.map_or("missing".into(), |v| v.to_string())
        ),
    ))
}

fn c5_halkin() -> Result<Outcome> {
    let inst = entry_with("halkin", &[("rho", 0.5)]);
    let rep = extremal::abnormality_probe(
        &inst.problem,
        reference(&inst),
        &ControlSampler::default(),
        &MaxConditionTolerances::default(),
        1e-6,
    )?;
    let Some(c) = rep.certificate else {
        return Ok((false, format!("no abnormal certificate ({})", rep.normal_note)));
    };
    let ok = !rep.normal_feasible && c.lambda0 == 0.0 && c.p0[0] < 0.0 && c.gap <= 1e-8;
    Ok((ok, format!("normal feasible {}, λ₀ = {}, p(0) = {:?}, gap {:.2e}", rep.normal_feasible, c.lambda0, c.p0, c.gap)))
}

fn c6_nash() -> Result<Outcome> {
    let (u1, u2, _) = catalog::nash_equilibrium(1.0, 2.0, 0.5, 1.0);
    let rates_ok = (u1 - 2.0 / 9.0).abs() <= 1e-15 && (u2 - 1.0 / 9.0).abs() <= 1e-15;
    let mut ok = rates_ok;
    let mut detail = format!("u₁* = {u1:.12}, u₂* = {u2:.12}");
    for (name, u) in [("nash_player1", u1), ("nash_player2", u2)] {
        let inst = entry_with(name, &[("c1", 1.0), ("c2", 2.0), ("r", 0.5), ("alpha", 1.0)]);
        let (pb, cand) = (&inst.problem, reference(&inst));
        let pd = pontryagin(&inst);
        let mc = extremal::max_condition_check(pb, cand, &pd, &ControlSampler::default(), &MaxConditionTolerances::default())?;
        let stat = mc.stationarity.unwrap_or(f64::INFINITY);
        let adj = extremal::adjoint_residual(pb, cand, &pd);
        let tr = extremal::transversality_check(pb, &pd, &[], DecayMode::P2, 1e-6)?.verdict();
        let conc = sufficiency::concavity_check(pb, cand, &pd.p, &SufficiencyConfig::default())?;
        let rate = sup_error(&cand.u, 0, |_| u);
        let good = stat <= 1e-10 && pd.p.sup_norm() == 0.0 && adj <= 1e-6 && tr.is_pass() && conc.verdict.is_pass() && rate <= 1e-12;
        ok &= good;
        detail.push_str(&format!("; {name}: stationarity {stat:.1e}, adjoint {adj:.1e}, transversality {tr}, concavity {}", conc.verdict));
    }
    Ok((ok, detail))
}

fn c7_resource() -> Result<Outcome> {
    let cfg = VerifyConfig { suites: vec![Suite::Constrained], ..Default::default() };
    // Case (A)
    let a = entry_with("resource", &[("q", 0.5)]);
    let out = verify::verify_entry(&a, &cfg)?;
    let cm = constrained(&a);
    let (rho, r) = (1.0, 0.1);
    let p = cm.p();
    let p1 = p.component(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let p2 = sup_error(&p, 1, |t| -(r / rho) * (-rho * t).exp());
    let mass: f64 = cm.measures.iter().map(|m| m.total_mass()).sum();
    let res_a = out.report.checks.iter().filter_map(|c| c.residual).fold(0.0, f64::max);
    let ok_a = out.report.summary.is_pass() && mass == 0.0 && p1 <= 1e-12 && p2 <= 1e-6 && res_a <= 1e-6 && a.meta.case.as_deref() == Some("A");
    // Case (C)
    let c = entry("resource");
    let (pb, cand) = (&c.problem, reference(&c));
    let cmc = constrained(&c);
    let oracle = ResourceCaseC::new(rho, r, 1.0, 0.2, 2.0, 0.0)?;
    let m = &cmc.measures[0];
    let sup = constraints::support_check(pb, &cand.x, m, 1e-6, 1e-8)?;
    let dens = &m.density;
    let before = dens.times().iter().zip(dens.values()).filter(|(t, _)| **t < oracle.t_prime).all(|(_, v)| v[0] == 0.0);
    let after = dens.times().iter().zip(dens.values()).filter(|(t, _)| **t > oracle.t_prime).all(|(_, v)| v[0] > 0.0);
    let oracle_err = dens
        .times()
        .iter()
        .zip(dens.values())
        .filter(|(t, _)| **t > oracle.t_prime)
        .map(|(&t, v)| (v[0] - oracle.density(t, pb.nu.eval(t).unwrap())).abs())
        .fold(0.0, f64::max);
    let res_c = constraints::integral_adjoint_residual(pb, cand, &cmc)?;
    let ok_c = c.meta.case.as_deref() == Some("C") && sup.verdict.is_pass() && before && after && oracle_err <= 1e-12 && res_c <= 1e-5;
    Ok((
        ok_a && ok_c,
        format!(
            "A: suite {}, μ mass {mass}, ‖p₁‖ {p1:.1e}, p₂ error {p2:.2e}, worst residual {res_a:.2e}; \
             C: t′ = {:.6}, support {} (stray {:.1e}), density on [t′, T] only: {}, integral residual {res_c:.2e}",
            out.report.summary,
            oracle.t_prime,
            sup.verdict,
            sup.stray_mass,
            before && after
        ),
    ))
}

/// `ẋ = u`, `f = x²/2`, `g = x − 2`, `ν = e^{−t}`, `ω = e^{−t}` along
/// `x = e^{−t}`, so that `H_x = −e^{−2t}` is independent of p.
fn synthetic(grid: Arc<Grid>) -> Result<(ControlProblem, CandidateProcess)> {
    let pb = ControlProblem::new(ProblemSpec {
        name: "synthetic".into(),
        f: |_t: f64, x: &Vector, _u: &Vector| 0.5 * x[0] * x[0],
        f_x: |_t: f64, x: &Vector, _u: &Vector| x.clone(),
        phi: |_t: f64, _x: &Vector, u: &Vector| u.clone(),
        phi_x: |_t: f64, _x: &Vector, _u: &Vector| nalgebra::DMatrix::zeros(1, 1),
        control_set: ControlSet::interval(-1.0, 1.0),
        x0: vec![1.0],
        omega: "exp:1".parse()?,
        nu: "exp:1".parse()?,
        p_exp: 2.0,
    })?
    .with_constraint(StateConstraint::new("x <= 2", |_, x| x[0] - 2.0, |_, _| DVector::from_element(1, 1.0)));
    let v = |s: f64| DVector::from_element(1, s);
    let cand = CandidateProcess::from_closed_form(
        grid,
        ClosedForm::new(move |t| v((-t).exp()), move |t| v(-(-t).exp()), move |t| v(-(-t).exp())),
    )?;
    Ok((pb, cand))
}

fn c8_decomposition() -> Result<Outcome> {
    let tau = 2.5;
    // The residual is the O(h⁴) error of cumulative quadrature of the smooth
    // part; T = 10 keeps it well below the tolerance at N = 4096.
    let grid = Arc::new(Grid::uniform(10.0, 4096)?.with_breakpoints(&[tau])?);
    let (pb, cand) = synthetic(grid.clone())?;
    let p0 = -0.3;
    let probe = SampledFn::scalar(grid.clone(), |t| t * (-0.5 * t).exp(), Some(&|t: f64| (1.0 - 0.5 * t) * (-0.5 * t).exp()))?;
    let zero = SampledFn::scalar(grid.clone(), |_| 0.0, None)?;
    let mut worst_dec = 0.0f64;
    let mut worst_id = 0.0f64;
    let mut detail = Vec::new();

    // Single atom: p = p0 + (1 − e^{−2t})/2 + β e^{−τ} 1_{t>τ}.
    let beta = 0.7;
    let smooth = SampledFn::scalar(grid.clone(), move |t| p0 + 0.5 * (1.0 - (-2.0 * t).exp()), None)?;
    let atom = ConstraintMeasure::new(0, zero.clone(), vec![Atom { tau, beta }], 0.0)?;
    let cm = ConstrainedMultipliers::from_smooth(&pb, &cand, 1.0, smooth, vec![atom])?;
    let jump_ok = cm.jumps.len() == 1 && (cm.jumps[0].size[0] - beta * (-tau).exp()).abs() <= 1e-15;
    let dec = constraints::decompose_adjoint(&pb, &cand, &cm)?;
    let id = constraints::hbr1_identity(&pb, &cand, &cm, &probe, 1e-6)?;
    worst_dec = worst_dec.max(dec.residual);
    worst_id = worst_id.max(id.discrepancy);
    detail.push(format!("atom: decomposition {:.2e}, identity {:.2e}", dec.residual, id.discrepancy));

    // Density only: λ = e^{−t}/2, p = p0 + 3(1 − e^{−2t})/4.
    let smooth = SampledFn::scalar(grid.clone(), move |t| p0 + 0.75 * (1.0 - (-2.0 * t).exp()), None)?;
    let dens = SampledFn::scalar(grid.clone(), |t| 0.5 * (-t).exp(), None)?;
    let m = ConstraintMeasure::new(0, dens, vec![], 0.0)?;
    let cm = ConstrainedMultipliers::from_smooth(&pb, &cand, 1.0, smooth, vec![m])?;
    let dec = constraints::decompose_adjoint(&pb, &cand, &cm)?;
    let id = constraints::hbr1_identity(&pb, &cand, &cm, &probe, 1e-6)?;
    worst_dec = worst_dec.max(dec.residual);
    worst_id = worst_id.max(id.discrepancy);
    detail.push(format!("density: decomposition {:.2e}, identity {:.2e}", dec.residual, id.discrepancy));

    Ok((jump_ok && worst_dec <= 1e-10 && worst_id <= 1e-6, detail.join("; ")))
}

/// Exhaustive search over bang-bang controls with at most two switches on
/// the grid `kT/M` for `ẋ = u x`, payoff `∫ (1 − u) x`, `x(0) = 1`.
fn pathology_oracle(horizon: f64, m: usize) -> f64 {
    let h = horizon / m as f64;
    let value = |arcs: &[(bool, usize)]| {
        let (mut x, mut j) = (1.0f64, 0.0);
        for &(grow, cells) in arcs {
            let len = cells as f64 * h;
            if grow {
                x *= len.exp();
            } else {
                j += x * len;
            }
        }
        j
    };
    let mut best = f64::NEG_INFINITY;
    for first in [false, true] {
        for a in 0..=m {
            for b in a..=m {
                let arcs = [(first, a), (!first, b - a), (first, m - b)];
                best = best.max(value(&arcs));
            }
        }
    }
    best
}

fn c9_pathology() -> Result<Outcome> {
    let inst = entry("truncation_pathology");
    let mut ok = true;
    let mut detail = Vec::new();
    for horizon in [2.0, 3.0, 4.0] {
        let sol = horizonlab::solve_truncated_switching(&inst.problem, horizon, 2)?;
        let exact = (horizon - 1.0f64).exp();
        let oracle = pathology_oracle(horizon, 120);
        let rel = (sol.value - exact).abs() / exact;
        let rel_oracle = (oracle - exact).abs() / exact;
        ok &= rel <= 1e-6 && rel_oracle <= 1e-6;
        detail.push(format!("T={horizon}: J_T rel. error {rel:.1e} (oracle {rel_oracle:.1e})"));
    }
    let sweep = horizonlab::truncation_sweep(&inst.problem, &[2.0, 4.0, 8.0, 16.0], &SwitchingOptions::default(), Default::default())?;
    let hyp = horizonlab::hypothesis_h_check(&inst.problem, &sweep, reference(&inst), 1e-4);
    ok &= hyp.pathology && hyp.verdict == Verdict::Fail;
    detail.push(format!("hypothesis {} with pathology flag {}", hyp.verdict, hyp.pathology));
    Ok((ok, detail.join("; ")))
}

fn c10_duality() -> Result<Outcome> {
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    let mut instances: Vec<Instance> = catalog::names().into_iter().map(entry).collect();
    instances.push(entry_with("resource", &[("q", 0.5)]));
    for inst in &instances {
        let cand = reference(inst);
        // Breakpoint twins may add nodes to the base grid.
        assert!(cand.times().len() >= catalog::DEFAULT_GRID_N, "{}", inst.name);
        let e = extremal::fundamental_matrices(&inst.problem, cand)?.duality_error();
        count += 1;
        if e >= worst.0 {
            worst = (e, inst.name.clone());
        }
    }
    Ok((worst.0 <= 1e-8, format!("{count} problems, max ‖ZᵀY − I‖ = {:.2e} ({})", worst.0, worst.1)))
}

fn c11_equilibria() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fishing = catalog::info("fishing")?;
    let investment = catalog::info("investment")?;
    let (mut worst_f, mut worst_i) = (0.0f64, 0.0f64);
    let mut draws = (0, 0);
    while draws.0 < 100 {
        let mut p = fishing.defaults();
        p.insert("r".into(), rng.gen_range(0.2..5.0));
        p.insert("rho".into(), rng.gen_range(0.05..5.0));
        p.insert("K".into(), rng.gen_range(0.1..10.0));
        if fishing.violated(&p).is_some() {
            continue;
        }
        let (x, u) = catalog::fishing_equilibrium(p["r"], p["rho"], p["K"]);
        worst_f = worst_f.max(catalog::fishing_phi(p["r"], p["K"], x, u).abs());
        draws.0 += 1;
    }
    while draws.1 < 100 {
        let mut p = investment.defaults();
        p.insert("gamma".into(), rng.gen_range(0.1..5.0));
        p.insert("rho".into(), rng.gen_range(0.05..5.0));
        p.insert("delta".into(), rng.gen_range(0.05..5.0));
        if investment.violated(&p).is_some() {
            continue;
        }
        let (x, u) = catalog::investment_equilibrium(p["gamma"], p["rho"], p["delta"]);
        worst_i = worst_i.max(catalog::investment_phi(p["gamma"], p["delta"], x, u).abs());
        draws.1 += 1;
    }
    Ok((worst_f <= 1e-12 && worst_i <= 1e-12, format!("100 + 100 draws, max |φ| fishing {worst_f:.1e}, investment {worst_i:.1e}")))
}

fn c12_reduction() -> Result<Outcome> {
    let inst = entry("regulator3");
    let mut reduced = inst.clone();
    reduced.problem = reduced.problem.without_constraints();
    let cfg = |s: Vec<Suite>| VerifyConfig { suites: s, ..Default::default() };
    let with = verify::verify_entry(&inst, &cfg(vec![Suite::Constrained]))?.report;
    let without = verify::verify_entry(&reduced, &cfg(vec![Suite::Constrained]))?.report;
    let plain = verify::verify_entry(&reduced, &cfg(vec![Suite::Pmp, Suite::Transversality]))?.report;
    let v = |r: &horizon_pmp::report::VerificationReport, n: &str| r.check(n).map(|c| c.verdict);
    let transversality = Verdict::combine(plain.checks.iter().filter(|c| c.name.starts_with("transversality.")).map(|c| c.verdict));
    let pairs = [
        ("constrained.adjoint", v(&plain, "pmp.adjoint")),
        ("constrained.max_condition", v(&plain, "pmp.max_condition")),
        ("constrained.transversality", Some(transversality)),
    ];
    let mut mismatches = Vec::new();
    for (name, unconstrained) in pairs {
        let (a, b) = (v(&with, name), v(&without, name));
        if a.is_none() || a != b || a != unconstrained {
            mismatches.push(format!("{name}: {a:?} / {b:?} / {unconstrained:?}"));
        }
    }
    let shared: Vec<_> = without.checks.iter().filter(|c| c.name != "constrained.active_set").collect();
    for c in shared {
        if v(&with, &c.name) != Some(c.verdict) {
            mismatches.push(format!("{} differs", c.name));
        }
    }
    Ok((
        mismatches.is_empty(),
        format!(
            "{} constrained checks with the constraint, {} without; mismatches: {}",
            with.checks.len(),
            without.checks.len(),
            if mismatches.is_empty() { "none".into() } else { mismatches.join(", ") }
        ),
    ))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("regulator adjoint via representation", c1_regulator_adjoint),
        ("regulator full suite", c2_regulator_suite),
        ("exponential weight criterion table", c3_weight_table),
        ("Weibull properties and example", c4_weibull),
        ("Halkin abnormality certificate", c5_halkin),
        ("Nash equilibrium", c6_nash),
        ("state-constrained resource model", c7_resource),
        ("measure decomposition identity", c8_decomposition),
        ("truncation pathology", c9_pathology),
        ("fundamental-matrix duality", c10_duality),
        ("equilibrium algebra", c11_equilibria),
        ("reduction property", c12_reduction),
    ];
    let mut failed = 0;
    for (k, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(run) {
            Ok(Ok(o)) => o,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        if !ok {
            failed += 1;
        }
        let status = if ok { "PASS" } else { "FAIL" };
        println!("[{status}] {:>2}. {label}: {detail} [{:.2} s]", k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

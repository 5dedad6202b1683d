//! Property tests for the library invariants.

use horizon_pmp::catalog::{self, Instance, Multipliers, Params};
use horizon_pmp::constraints::{self, Atom, ConstrainedMultipliers, ConstraintMeasure};
use horizon_pmp::extremal::{self, ControlSampler, MaxConditionTolerances, PontryaginData};
use horizon_pmp::horizonlab::{self, SwitchingOptions};
use horizon_pmp::problem::{
    self, AdmissibilityTolerances, CandidateProcess, ClosedForm, ControlProblem, ControlSet, ProblemSpec, StateConstraint, Vector,
};
use horizon_pmp::quad::ShellConfig;
use horizon_pmp::report::Verdict;
use horizon_pmp::spaces::{self, DecayMode, Grid, SampledFn};
use horizon_pmp::sufficiency::{self, ConcavityMode, SufficiencyConfig};
use horizon_pmp::weights::{check_properties_p2, check_properties_star, DistributionSpec, QuadratureConfig, WeightSpec};
use nalgebra::DVector;
use proptest::prelude::*;
use std::sync::Arc;

fn entry(name: &str) -> Instance {
    catalog::get(name, &Params::new()).unwrap()
}

fn pontryagin(inst: &Instance) -> PontryaginData {
    match inst.multipliers.as_ref().unwrap() {
        Multipliers::Pontryagin(pd) => pd.clone(),
        Multipliers::Constrained(cm) => PontryaginData::new(cm.lambda0, cm.p()).unwrap(),
    }
}

fn grid(t_max: f64, n: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform(t_max, n).unwrap())
}

/// `(c0 + c1 t + c2 t²) e^{−b t}` with its derivative.
fn poly_exp(g: Arc<Grid>, c: [f64; 3], b: f64) -> SampledFn {
    SampledFn::scalar(
        g,
        move |t| (c[0] + c[1] * t + c[2] * t * t) * (-b * t).exp(),
        Some(&move |t: f64| ((c[1] + 2.0 * c[2] * t) - b * (c[0] + c[1] * t + c[2] * t * t)) * (-b * t).exp()),
    )
    .unwrap()
}

fn weight_strategy() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![(0.2f64..4.0).prop_map(WeightSpec::exponential), (1.2f64..4.0).prop_map(WeightSpec::power_law)]
}

fn distribution_strategy() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![(0.2f64..3.0).prop_map(DistributionSpec::exponential), (0.2f64..0.95).prop_map(DistributionSpec::weibull)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponential_pair_criterion(a in 0.1f64..6.0, rho in 0.1f64..3.0) {
        prop_assume!((a - 2.0 * rho).abs() > 0.05);
        let r = check_properties_p2(&WeightSpec::exponential(a), &DistributionSpec::exponential(rho), &QuadratureConfig::default());
        prop_assert_eq!(r.summary().is_pass(), a < 2.0 * rho, "{:?}", r.entries);
    }

    #[test]
    fn e5_implies_starred_e5(nu in weight_strategy(), omega in distribution_strategy(), p in 1.5f64..4.0) {
        let quad = QuadratureConfig::default();
        let plain = check_properties_p2(&nu, &omega, &quad);
        if plain.verdict("E5") == Some(Verdict::Pass) {
            let star = check_properties_star(&nu, &omega, p, &quad);
            prop_assert_eq!(star.verdict("E*5"), Some(Verdict::Pass));
        }
    }

    #[test]
    fn starred_p2_agrees_on_e7(a in 0.1f64..6.0, rho in 0.1f64..3.0) {
        prop_assume!((a - 2.0 * rho).abs() > 0.05);
        let (nu, omega, quad) = (WeightSpec::exponential(a), DistributionSpec::exponential(rho), QuadratureConfig::default());
        let plain = check_properties_p2(&nu, &omega, &quad).verdict("E7");
        let star = check_properties_star(&nu, &omega, 2.0, &quad).verdict("E*7");
        prop_assert!(plain.is_some());
        prop_assert_eq!(plain, star);
    }

    #[test]
    fn holder_dominance(c in prop::array::uniform3(-2.0f64..2.0), b in 0.6f64..2.0, p in 1.5f64..3.5) {
        // ν = e^{−t/2}, ω = e^{−t}: x e^{−b t} with b > 1/(2p) has a finite weighted norm.
        let x = poly_exp(grid(60.0, 6001), c, b);
        let (nu, omega) = (WeightSpec::exponential(0.5), DistributionSpec::exponential(1.0));
        let (lhs, rhs) = spaces::holder_sides(&x, &nu, &omega, p, &ShellConfig::default()).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12, "{} > {}", lhs, rhs);
    }

    #[test]
    fn norm_homogeneity_and_triangle(
        c1 in prop::array::uniform3(-2.0f64..2.0),
        c2 in prop::array::uniform3(-2.0f64..2.0),
        b in 1.0f64..2.0,
        s in -5.0f64..5.0,
        p in 1.2f64..4.0,
    ) {
        let g = grid(40.0, 2001);
        let nu = WeightSpec::exponential(1.0);
        let (f, h) = (poly_exp(g.clone(), c1, b), poly_exp(g, c2, b));
        let nf = spaces::weighted_lp_norm(&f, &nu, p).unwrap();
        let ns = spaces::weighted_lp_norm(&f.scaled(s), &nu, p).unwrap();
        prop_assert!((ns - s.abs() * nf).abs() <= 1e-12 * nf.max(1e-300) + 1e-300, "{} vs {}", ns, s.abs() * nf);
        let sum = spaces::weighted_lp_norm(&f.add(&h).unwrap(), &nu, p).unwrap();
        let nh = spaces::weighted_lp_norm(&h, &nu, p).unwrap();
        prop_assert!(sum <= (nf + nh) * (1.0 + 1e-12));
    }

    #[test]
    fn finite_norm_implies_decay(c in prop::array::uniform3(-2.0f64..2.0), b in 0.0f64..1.5) {
        // ν = e^{−t}; x e^{bt}·poly has finite ‖x‖_{2,ν} for b < 1/2 only.
        prop_assume!(!(0.45..=0.55).contains(&b));
        prop_assume!(c.iter().any(|v| v.abs() > 0.1));
        let nu = WeightSpec::exponential(1.0);
        // The tail must be long enough for the slowest admissible decay e^{−(1−2b)t}.
        let t_max = if b < 0.5 { 40.0 + 60.0 / (1.0 - 2.0 * b) } else { 80.0 };
        let x = poly_exp(grid(t_max, 8001), c, -b);
        let finite = spaces::w1p_finiteness(&x, &nu, 2.0).unwrap().0.is_finite();
        prop_assert_eq!(finite, b < 0.5);
        if finite {
            let rep = spaces::check_decay_lemmas(&x, None, &nu, DecayMode::P2).unwrap();
            prop_assert_eq!(rep.verdict("f"), Some(Verdict::Pass));
            prop_assert_eq!(rep.verdict("psi"), Some(Verdict::Pass));
        }
    }

    #[test]
    fn admissibility_is_monotone_in_tolerance(scale in 1.0f64..1e6) {
        let inst = entry("regulator");
        let cand = inst.reference.as_ref().unwrap();
        let base = AdmissibilityTolerances::default();
        let loose = AdmissibilityTolerances { dynamics: base.dynamics * scale, constraint: base.constraint * scale };
        let a = problem::check_admissible(&inst.problem, cand, &base);
        let b = problem::check_admissible(&inst.problem, cand, &loose);
        for item in &a.items {
            if item.verdict.is_pass() {
                prop_assert!(b.item(&item.id).unwrap().verdict.is_pass(), "{} flipped", item.id);
            }
        }
    }

    #[test]
    fn max_condition_is_scale_invariant(c in 0.05f64..20.0) {
        for name in ["regulator", "nash_player1", "fishing"] {
            let inst = entry(name);
            let (pb, cand) = (&inst.problem, inst.reference.as_ref().unwrap());
            let pd = pontryagin(&inst);
            let (s, tol) = (ControlSampler::default(), MaxConditionTolerances::default());
            let a = extremal::max_condition_check(pb, cand, &pd, &s, &tol).unwrap();
            let b = extremal::max_condition_check(pb, cand, &pd.scaled(c), &s, &tol).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
            prop_assert_eq!(&a.exceptional_times, &b.exceptional_times);
            prop_assert!((a.worst_gap - b.worst_gap).abs() <= 1e-12, "{}: {} vs {}", name, a.worst_gap, b.worst_gap);
        }
    }

    #[test]
    fn transversality_implies_pairing_decay(c in prop::array::uniform3(-2.0f64..2.0), b in 0.0f64..0.4) {
        // ν = e^{−3t}; probes with growth rate below 3/2 have finite norm.
        let inst = entry("regulator");
        let pd = pontryagin(&inst);
        let probe = poly_exp(inst.grid().unwrap(), c, -b);
        let tr = extremal::transversality_check(&inst.problem, &pd, &[probe], DecayMode::P2, 1e-6).unwrap();
        prop_assert!(tr.get("p_weighted").unwrap().verdict.is_pass());
        prop_assert_eq!(tr.get("pairing_0").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn decomposition_round_trip(tau in 0.5f64..8.0, beta in 0.05f64..3.0, p0 in -2.0f64..2.0, lam in 0.0f64..2.0) {
        let g = Arc::new(Grid::uniform(10.0, 2048).unwrap().with_breakpoints(&[tau]).unwrap());
        let (pb, cand) = synthetic(g.clone());
        let smooth = SampledFn::scalar(g.clone(), move |t| p0 + (0.5 + 0.5 * lam) * (1.0 - (-2.0 * t).exp()), None).unwrap();
        let dens = SampledFn::scalar(g.clone(), move |t| lam * (-t).exp(), None).unwrap();
        let m = ConstraintMeasure::new(0, dens, vec![Atom { tau, beta }], 0.0).unwrap();
        let cm = ConstrainedMultipliers::from_smooth(&pb, &cand, 1.0, smooth, vec![m]).unwrap();
        let dec = constraints::decompose_adjoint(&pb, &cand, &cm).unwrap();
        prop_assert!(dec.residual <= 1e-9, "residual {}", dec.residual);
        let rebuilt = dec.rebuild();
        let p = cm.p();
        let diff = (0..p.len()).map(|i| (rebuilt.value(i) - p.value(i)).norm()).fold(0.0, f64::max);
        prop_assert!((diff - dec.residual).abs() <= 1e-15 && diff <= 1e-9);
        // r is the single jump β ν(τ) g_x after τ and zero before.
        let jump = beta * (-tau).exp();
        for (t, r) in dec.r.times().iter().zip(dec.r.values()) {
            let expect = if *t > tau + 1e-12 { jump } else { 0.0 };
            prop_assert!((r[0] - expect).abs() <= 1e-15, "r({}) = {}", t, r[0]);
        }
        let probe = SampledFn::scalar(g, |t| (1.0 - (-t).exp()) * (0.5 * t).cos(), None).unwrap().with_fd_derivatives();
        let id = constraints::hbr1_identity(&pb, &cand, &cm, &probe, 1e-6).unwrap();
        prop_assert!(id.verdict.is_pass(), "identity discrepancy {}", id.discrepancy);
    }

    #[test]
    fn switching_grid_refinement_never_decreases(horizon in 0.5f64..6.0, m in 4usize..40, k in 1usize..=3) {
        let pb = entry("truncation_pathology").problem;
        let coarse = SwitchingOptions { switch_count: k, resolution: m, refine: false };
        let fine = SwitchingOptions { resolution: 2 * m, ..coarse };
        let a = horizonlab::solve_truncated_switching_with(&pb, horizon, &coarse).unwrap().value;
        let b = horizonlab::solve_truncated_switching_with(&pb, horizon, &fine).unwrap().value;
        prop_assert!(b >= a - 1e-12 * a.abs().max(1.0), "{} < {}", b, a);
    }

    #[test]
    fn convergent_defects_are_cauchy(eps in 0.01f64..0.3) {
        let inst = entry("regulator");
        let star = inst.reference.as_ref().unwrap();
        let s = 2f64.sqrt();
        let (k, x0) = (1.0 - s, 2.0);
        let kc = k - eps;
        let v = |s: f64| DVector::from_element(1, s);
        // ẋ = 2x + u with a slightly stronger feedback u = (k_c − 2) x.
        let comp = CandidateProcess::from_closed_form(
            inst.grid().unwrap(),
            ClosedForm::new(move |t| v(x0 * (kc * t).exp()), move |t| v(x0 * kc * (kc * t).exp()), move |t| v((kc - 2.0) * x0 * (kc * t).exp())),
        )
        .unwrap();
        prop_assert!(problem::check_dynamics_residual(&inst.problem, &comp) <= 1e-9);
        let d = horizonlab::defect_series(&inst.problem, star, &comp, &[5.0, 10.0, 20.0, 30.0, 40.0], 1e-6).unwrap();
        prop_assert!(d.cauchy);
        prop_assert!((d.liminf - d.limsup).abs() <= 1e-6 * d.limsup.abs().max(1.0));
        prop_assert!(d.classification.global && d.classification.overtaking);
        prop_assert!(d.liminf > 0.0);
    }

    #[test]
    fn nash_rates_sum(c1 in 0.1f64..5.0, c2 in 0.1f64..5.0, r in 0.05f64..2.0, alpha in 0.1f64..3.0) {
        let (u1, u2, _) = catalog::nash_equilibrium(c1, c2, r, alpha);
        prop_assert!((u1 + u2 - 1.0 / (c1 + c2)).abs() <= 1e-15 / (c1 + c2));
    }

    #[test]
    fn steady_states_are_equilibria(r in 0.2f64..5.0, rho in 0.05f64..5.0, k in 0.1f64..10.0, gamma in 0.1f64..5.0, delta in 0.05f64..5.0) {
        let fishing = catalog::info("fishing").unwrap();
        let mut p = fishing.defaults();
        p.extend([("r".to_string(), r), ("rho".to_string(), rho), ("K".to_string(), k)]);
        if fishing.violated(&p).is_none() {
            let (x, u) = catalog::fishing_equilibrium(r, rho, k);
            prop_assert!(catalog::fishing_phi(r, k, x, u).abs() <= 1e-12);
        }
        let (x, u) = catalog::investment_equilibrium(gamma, rho, delta);
        prop_assert!(catalog::investment_phi(gamma, delta, x, u).abs() <= 1e-12);
    }

    #[test]
    fn hamiltonian_sup_is_monotone_under_refinement(m in 3usize..40, t in 0.0f64..10.0) {
        let inst = entry("fishing");
        let cand = inst.reference.as_ref().unwrap();
        let p = pontryagin(&inst).p.value_at(t);
        let x = cand.state_at(t);
        let coarse = ControlSampler { box_points: m, refine: false, ..Default::default() };
        let fine = ControlSampler { box_points: 2 * m - 1, ..coarse.clone() };
        let a = sufficiency::hamiltonian_sup(&inst.problem, t, &x, &p, &coarse).unwrap();
        let b = sufficiency::hamiltonian_sup(&inst.problem, t, &x, &p, &fine).unwrap();
        prop_assert!(b >= a - 1e-15 * a.abs().max(1.0), "{} < {}", b, a);
    }
}

/// `ẋ = u`, `f = x²/2`, `g = x − 2`, `ν = ω = e^{−t}` along `x = e^{−t}`.
fn synthetic(g: Arc<Grid>) -> (ControlProblem, CandidateProcess) {
    let pb = ControlProblem::new(ProblemSpec {
        name: "synthetic".into(),
        f: |_t: f64, x: &Vector, _u: &Vector| 0.5 * x[0] * x[0],
        f_x: |_t: f64, x: &Vector, _u: &Vector| x.clone(),
        phi: |_t: f64, _x: &Vector, u: &Vector| u.clone(),
        phi_x: |_t: f64, _x: &Vector, _u: &Vector| nalgebra::DMatrix::zeros(1, 1),
        control_set: ControlSet::interval(-1.0, 1.0),
        x0: vec![1.0],
        omega: DistributionSpec::exponential(1.0),
        nu: WeightSpec::exponential(1.0),
        p_exp: 2.0,
    })
    .unwrap()
    .with_constraint(StateConstraint::new("x <= 2", |_, x| x[0] - 2.0, |_, _| DVector::from_element(1, 1.0)));
    let v = |s: f64| DVector::from_element(1, s);
    let cand = CandidateProcess::from_closed_form(g, ClosedForm::new(move |t| v((-t).exp()), move |t| v(-(-t).exp()), move |t| v(-(-t).exp())))
        .unwrap();
    (pb, cand)
}

#[test]
fn power_law_is_a_strict_generalization() {
    let quad = QuadratureConfig::default();
    let (nu, omega) = (WeightSpec::power_law(2.0), DistributionSpec::weibull(0.5));
    assert_eq!(check_properties_p2(&nu, &omega, &quad).verdict("E5"), Some(Verdict::Fail));
    assert_eq!(check_properties_star(&nu, &omega, 3.0, &quad).verdict("E*5"), Some(Verdict::Pass));
}

#[test]
fn representation_solves_the_adjoint_equation() {
    let quad = QuadratureConfig::default();
    for name in catalog::names() {
        let inst = entry(name);
        let pb = &inst.problem;
        if inst.meta.decay_mode != DecayMode::P2 || !check_properties_p2(&pb.nu, &pb.omega, &quad).summary().is_pass() {
            continue;
        }
        let cand = inst.reference.as_ref().unwrap();
        let Ok(p) = extremal::adjoint_via_representation(pb, cand) else {
            continue;
        };
        let pd = PontryaginData::new(1.0, p).unwrap();
        let r = extremal::adjoint_residual(pb, cand, &pd);
        assert!(r <= 1e-6, "{name}: adjoint residual {r:e}");
    }
}

#[test]
fn regulator_adjoint_is_grid_stable() {
    let p0 = |n: usize| {
        let inst = catalog::get_on("regulator", &Params::new(), &catalog::GridRequest { t_max: None, n }).unwrap();
        extremal::adjoint_via_representation(&inst.problem, inst.reference.as_ref().unwrap()).unwrap().value(0)[0]
    };
    let (a, b) = (p0(4096), p0(8192));
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn active_sets_at_zero_tolerance() {
    let r3 = entry("regulator3");
    let act = problem::active_indices(&r3.problem, &r3.reference.as_ref().unwrap().x, 0.0);
    assert_eq!(act.indices(), vec![0]);
    assert!(act.entries[0].attained_at_infinity && act.entries[0].active_times.is_empty());

    let res = entry("resource");
    let act = problem::active_indices(&res.problem, &res.reference.as_ref().unwrap().x, 0.0);
    let e = &act.entries[0];
    assert!(e.active && !e.attained_at_infinity);
    let t_prime = res.meta.values["t_prime"];
    assert!(e.active_times.iter().all(|t| *t >= t_prime - 1e-12));
}

#[test]
fn concavity_modes_agree() {
    for name in ["regulator", "nash_player1", "nash_player2", "resource"] {
        let inst = entry(name);
        let (pb, cand) = (&inst.problem, inst.reference.as_ref().unwrap());
        let p = match inst.multipliers.as_ref().unwrap() {
            Multipliers::Pontryagin(pd) => pd.p.clone(),
            Multipliers::Constrained(cm) => cm.p(),
        };
        let base = SufficiencyConfig { max_nodes: 64, ..Default::default() };
        let hess = SufficiencyConfig { mode: ConcavityMode::FiniteDifferenceHessian, ..base.clone() };
        let a = sufficiency::concavity_check(pb, cand, &p, &base).unwrap();
        let b = sufficiency::concavity_check(pb, cand, &p, &hess).unwrap();
        assert_eq!(a.verdict, b.verdict, "{name}");
    }
}

#[test]
fn max_condition_matches_hamiltonian_sup() {
    let inst = entry("nash_player1");
    let (pb, cand) = (&inst.problem, inst.reference.as_ref().unwrap());
    let pd = pontryagin(&inst);
    let sampler = ControlSampler::default();
    let rep = extremal::max_condition_check(pb, cand, &pd, &sampler, &MaxConditionTolerances::default()).unwrap();
    assert!(rep.verdict.is_pass());
    for i in (0..cand.times().len()).step_by(256) {
        let t = cand.times()[i];
        let sup = sufficiency::hamiltonian_sup(pb, t, cand.x.value(i), pd.p.value(i), &sampler).unwrap();
        let h = pb.hamiltonian(t, cand.x.value(i), cand.u.value(i), pd.p.value(i), 1.0);
        assert!(sup - h <= 1e-8 * sup.abs().max(1.0), "t = {t}: {sup} vs {h}");
    }
}

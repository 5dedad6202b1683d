//! Built-in problem instances with closed-form reference processes and
//! multipliers.
//!
//! Every instance is stored in minimization form. Entries whose natural
//! objective is a supremum carry `sense = Maximize` and have `f` negated.

use crate::constraints::{ConstrainedMultipliers, ConstraintMeasure};
use crate::error::{Error, Result};
use crate::extremal::PontryaginData;
use crate::report::Verdict;
use crate::problem::{
    CandidateProcess, ClosedForm, ControlProblem, ControlSet, Matrix, ProblemSpec, StateConstraint, Vector,
};
use crate::spaces::{DecayMode, Grid, SampledFn};
use crate::weights::{DistributionSpec, WeightSpec};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Params = BTreeMap<String, f64>;

/// Default number of grid nodes for catalog instances.
pub const DEFAULT_GRID_N: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub doc: &'static str,
}

/// A named validity condition on the parameters.
#[derive(Clone)]
pub struct Predicate {
    pub label: &'static str,
    pub check: fn(&Params) -> bool,
}

impl std::fmt::Debug for Predicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label)
    }
}

/// Static description of a catalog entry.
#[derive(Debug, Clone)]
pub struct EntryInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub sense: Sense,
    pub params: Vec<ParamSpec>,
    pub predicates: Vec<Predicate>,
    /// Verification suites the reference is expected to pass.
    pub suites: Vec<&'static str>,
}

impl EntryInfo {
    pub fn defaults(&self) -> Params {
        self.params.iter().map(|p| (p.name.to_string(), p.default)).collect()
    }

    /// Defaults overridden by `overrides`; unknown keys are rejected.
    pub fn resolve(&self, overrides: &Params) -> Result<Params> {
        let mut out = self.defaults();
        for (k, v) in overrides {
            if !out.contains_key(k) {
                return Err(Error::UnknownParameter { entry: self.name.into(), param: k.clone() });
            }
            if !v.is_finite() {
                return Err(Error::ParameterConstraintViolated(format!("{k} must be finite")));
            }
            out.insert(k.clone(), *v);
        }
        Ok(out)
    }

    /// First violated predicate, if any.
    pub fn violated(&self, params: &Params) -> Option<&'static str> {
        self.predicates.iter().find(|p| !(p.check)(params)).map(|p| p.label)
    }
}

/// Grid used to sample an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRequest {
    /// `None` selects the entry's default horizon.
    pub t_max: Option<f64>,
    pub n: usize,
}

impl Default for GridRequest {
    fn default() -> Self {
        GridRequest { t_max: None, n: DEFAULT_GRID_N }
    }
}

/// Reference multipliers of an entry.
#[derive(Debug, Clone)]
pub enum Multipliers {
    Pontryagin(PontryaginData),
    Constrained(ConstrainedMultipliers),
}

impl Multipliers {
    pub fn lambda0(&self) -> f64 {
        match self {
            Multipliers::Pontryagin(pd) => pd.lambda0,
            Multipliers::Constrained(cm) => cm.lambda0,
        }
    }

    /// The adjoint sampled on the grid.
    pub fn p(&self) -> SampledFn {
        match self {
            Multipliers::Pontryagin(pd) => pd.p.clone(),
            Multipliers::Constrained(cm) => cm.p(),
        }
    }
}

/// Per-instance verification hints.
#[derive(Debug, Clone)]
pub struct EntryMeta {
    pub sense: Sense,
    /// True when the stored `f` is the negated natural integrand.
    pub sign_flipped: bool,
    pub suites: Vec<String>,
    pub decay_mode: DecayMode,
    /// Radius of the uniform tube around the reference.
    pub tube_gamma: f64,
    /// Majorant μ for condition (S).
    pub stability_mu: Option<SampledFn>,
    /// λ(t) for the strict growth check.
    pub strict_lambda: Option<SampledFn>,
    /// Case label for entries with several regimes.
    pub case: Option<String>,
    /// Derived scalars such as equilibria or switching times.
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    /// Summary verdict the reference is expected to reach on `suites`.
    pub expected: Verdict,
}

impl EntryMeta {
    fn new(sense: Sense, suites: &[&str], decay_mode: DecayMode, tube_gamma: f64) -> Self {
        EntryMeta {
            sense,
            sign_flipped: sense == Sense::Maximize,
            suites: suites.iter().map(|s| s.to_string()).collect(),
            decay_mode,
            tube_gamma,
            stability_mu: None,
            strict_lambda: None,
            case: None,
            values: BTreeMap::new(),
            notes: Vec::new(),
            expected: Verdict::Pass,
        }
    }
}

/// An instantiated entry.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub params: Params,
    pub problem: ControlProblem,
    pub reference: Option<CandidateProcess>,
    pub multipliers: Option<Multipliers>,
    pub meta: EntryMeta,
}

impl Instance {
    pub fn grid(&self) -> Option<Arc<Grid>> {
        self.reference.as_ref().map(|c| c.x.grid_arc().clone())
    }
}

fn v1(a: f64) -> Vector {
    DVector::from_element(1, a)
}

fn v2(a: f64, b: f64) -> Vector {
    DVector::from_vec(vec![a, b])
}

fn m1(a: f64) -> Matrix {
    DMatrix::from_element(1, 1, a)
}

struct P<'a>(&'a Params);

impl P<'_> {
    fn g(&self, k: &str) -> f64 {
        self.0[k]
    }
}

fn pos(p: &Params, keys: &[&str]) -> bool {
    keys.iter().all(|k| p[*k] > 0.0)
}

fn make_grid(req: &GridRequest, default_t: f64, breaks: &[f64]) -> Result<Arc<Grid>> {
    let g = Grid::default_grid(req.t_max.unwrap_or(default_t), req.n)?;
    Ok(Arc::new(if breaks.is_empty() { g } else { g.with_breakpoints(breaks)? }))
}

fn scalar_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Result<SampledFn> {
    SampledFn::scalar(grid.clone(), f, Some(&df))
}

fn pontryagin(lambda0: f64, p: SampledFn) -> Result<Option<Multipliers>> {
    Ok(Some(Multipliers::Pontryagin(PontryaginData::new(lambda0, p)?)))
}

type Builder = fn(&Params, &GridRequest) -> Result<Instance>;

struct Entry {
    info: fn() -> EntryInfo,
    build: Builder,
}

const ENTRIES: &[Entry] = &[
    Entry { info: regulator_info, build: regulator },
    Entry { info: regulator2_info, build: regulator2 },
    Entry { info: regulator3_info, build: regulator3 },
    Entry { info: halkin_info, build: halkin },
    Entry { info: nash1_info, build: nash_player1 },
    Entry { info: nash2_info, build: nash_player2 },
    Entry { info: fishing_info, build: fishing },
    Entry { info: investment_info, build: investment },
    Entry { info: terror_info, build: terror },
    Entry { info: terror_degenerate_info, build: terror_degenerate },
    Entry { info: resource_info, build: resource },
    Entry { info: weibull_info, build: weibull_harvest },
    Entry { info: pathology_info, build: truncation_pathology },
    Entry { info: decay_info, build: decay_example },
];

/// All entries in a fixed order.
pub fn list() -> Vec<EntryInfo> {
    ENTRIES.iter().map(|e| (e.info)()).collect()
}

pub fn names() -> Vec<&'static str> {
    list().iter().map(|e| e.name).collect()
}

pub fn info(name: &str) -> Result<EntryInfo> {
    let name = name.strip_prefix("catalog:").unwrap_or(name);
    list()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.into()))
}

/// Instantiates `name` with parameter overrides on the default grid.
pub fn get(name: &str, params: &Params) -> Result<Instance> {
    get_on(name, params, &GridRequest::default())
}

/// Instantiates `name` with parameter overrides on the requested grid.
pub fn get_on(name: &str, params: &Params, grid: &GridRequest) -> Result<Instance> {
    let name = name.strip_prefix("catalog:").unwrap_or(name);
    let entry = ENTRIES
        .iter()
        .find(|e| (e.info)().name == name)
        .ok_or_else(|| Error::UnknownProblem(name.into()))?;
    let info = (entry.info)();
    let resolved = info.resolve(params)?;
    if let Some(label) = info.violated(&resolved) {
        return Err(Error::ParameterConstraintViolated(format!("{name}: requires {label}")));
    }
    let mut inst = (entry.build)(&resolved, grid)?;
    inst.params = resolved;
    Ok(inst)
}

/// ½ω on the grid: the strict growth modulus of the quadratic regulators.
fn half_omega(grid: &Arc<Grid>, omega: &DistributionSpec) -> Result<SampledFn> {
    let w = omega.clone();
    SampledFn::scalar(grid.clone(), move |t| 0.5 * w.eval(t), None)
}

fn quadratic_regulator(name: &str, drift: f64, x0: f64, a: f64) -> Result<ControlProblem> {
    Ok(ControlProblem::new(ProblemSpec {
        name: name.into(),
        f: |_, x: &Vector, u: &Vector| 0.5 * (x[0] * x[0] + u[0] * u[0]),
        f_x: |_, x: &Vector, _: &Vector| x.clone(),
        phi: move |_, x: &Vector, u: &Vector| v1(drift * x[0] + u[0]),
        phi_x: move |_, _: &Vector, _: &Vector| m1(drift),
        control_set: ControlSet::real_line(),
        x0: vec![x0],
        omega: DistributionSpec::exponential(2.0),
        nu: WeightSpec::exponential(a),
        p_exp: 2.0,
    })?
    .with_stationary(|t, _, p, l0| {
        if l0 > 0.0 {
            vec![v1(p[0] / (l0 * (-2.0 * t).exp()))]
        } else {
            Vec::new()
        }
    }))
}

fn regulator_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec { name: "x0", default: 2.0, doc: "initial state" },
        ParamSpec { name: "a", default: 3.0, doc: "rate of the weight ν(t) = e^{-a t}" },
    ]
}

fn regulator_info() -> EntryInfo {
    EntryInfo {
        name: "regulator",
        summary: "min ∫ e^{-2t} ½(x² + u²), ẋ = 2x + u, u ∈ ℝ",
        sense: Sense::Minimize,
        params: regulator_params(),
        predicates: vec![Predicate { label: "0 < a < 4", check: |p| p["a"] > 0.0 && p["a"] < 4.0 }],
        suites: vec!["admissible", "pmp", "transversality", "michel", "sufficiency"],
    }
}

fn regulator_core(name: &str, p: &Params, req: &GridRequest) -> Result<Instance> {
    let p = P(p);
    let (x0, a) = (p.g("x0"), p.g("a"));
    let pb = quadratic_regulator(name, 2.0, x0, a)?;
    let s = 2f64.sqrt();
    let k = 1.0 - s;
    let c = -(1.0 + s) * x0;
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::from_closed_form(
        grid.clone(),
        ClosedForm::new(
            move |t| v1(x0 * (k * t).exp()),
            move |t| v1(x0 * k * (k * t).exp()),
            move |t| v1(c * (k * t).exp()),
        ),
    )?;
    // p = u_* ω
    let padj = scalar_fn(&grid, move |t| c * (-(1.0 + s) * t).exp(), move |t| -(1.0 + s) * c * (-(1.0 + s) * t).exp())?;
    let mut meta = EntryMeta::new(Sense::Minimize, &regulator_info().suites, DecayMode::P2, 0.5);
    meta.strict_lambda = Some(half_omega(&grid, &pb.omega)?);
    meta.values.insert("p0".into(), c);
    meta.values.insert("cost".into(), 0.5 * (1.0 + s) * x0 * x0);
    Ok(Instance {
        name: name.into(),
        params: Params::new(),
        problem: pb,
        reference: Some(cand),
        multipliers: pontryagin(1.0, padj)?,
        meta,
    })
}

fn regulator(p: &Params, req: &GridRequest) -> Result<Instance> {
    regulator_core("regulator", p, req)
}

fn regulator2_info() -> EntryInfo {
    EntryInfo {
        name: "regulator2",
        summary: "min ∫ e^{-2t} ½(x² + u²), ẋ = x + u, x(0) = 1, u ∈ ℝ",
        sense: Sense::Minimize,
        params: vec![ParamSpec { name: "a", default: 3.0, doc: "rate of the weight ν(t) = e^{-a t}" }],
        predicates: vec![Predicate {
            label: "2 < a < 4 (μ(t) = e^t must lie in L₂(ν))",
            check: |p| p["a"] > 2.0 && p["a"] < 4.0,
        }],
        suites: vec!["admissible", "pmp", "transversality", "michel", "normality", "sufficiency"],
    }
}

fn regulator2(p: &Params, req: &GridRequest) -> Result<Instance> {
    let pb = quadratic_regulator("regulator2", 1.0, 1.0, p["a"])?;
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::from_closed_form(
        grid.clone(),
        ClosedForm::new(|_| v1(1.0), |_| v1(0.0), |_| v1(-1.0)),
    )?;
    let padj = scalar_fn(&grid, |t| -(-2.0 * t).exp(), |t| 2.0 * (-2.0 * t).exp())?;
    let mut meta = EntryMeta::new(Sense::Minimize, &regulator2_info().suites, DecayMode::P2, 0.5);
    meta.stability_mu = Some(scalar_fn(&grid, f64::exp, f64::exp)?);
    meta.strict_lambda = Some(half_omega(&grid, &pb.omega)?);
    meta.values.insert("cs".into(), 1.0);
    Ok(Instance {
        name: "regulator2".into(),
        params: Params::new(),
        problem: pb,
        reference: Some(cand),
        multipliers: pontryagin(1.0, padj)?,
        meta,
    })
}

fn regulator3_info() -> EntryInfo {
    EntryInfo {
        name: "regulator3",
        summary: "regulator with the state constraint x ≥ 0, which binds only at infinity",
        sense: Sense::Minimize,
        params: regulator_params(),
        predicates: vec![
            Predicate { label: "0 < a < 4", check: |p| p["a"] > 0.0 && p["a"] < 4.0 },
            Predicate { label: "x0 > 0", check: |p| p["x0"] > 0.0 },
        ],
        suites: vec!["admissible", "constrained", "pmp", "transversality"],
    }
}

fn nonneg_state(k: usize, n: usize, name: &str) -> StateConstraint {
    StateConstraint::new(
        name,
        move |_, x: &Vector| -x[k],
        move |_, _: &Vector| {
            let mut g = DVector::zeros(n);
            g[k] = -1.0;
            g
        },
    )
}

fn regulator3(p: &Params, req: &GridRequest) -> Result<Instance> {
    let mut inst = regulator_core("regulator3", p, req)?;
    inst.problem = inst.problem.with_constraint(nonneg_state(0, 1, "x >= 0"));
    let grid = inst.grid().expect("regulator has a reference");
    let Some(Multipliers::Pontryagin(pd)) = inst.multipliers.take() else { unreachable!() };
    let cm = ConstrainedMultipliers::new(1.0, pd.p, Vec::new(), vec![ConstraintMeasure::zero(0, grid)])?;
    inst.multipliers = Some(Multipliers::Constrained(cm));
    inst.meta.suites = regulator3_info().suites.iter().map(|s| s.to_string()).collect();
    inst.meta.notes.push("the constraint supremum 0 is approached only as t → ∞".into());
    Ok(inst)
}

fn halkin_info() -> EntryInfo {
    EntryInfo {
        name: "halkin",
        summary: "sup ∫ e^{-ρt}(u − x), ẋ = u² + x, x(0) = 0, u ∈ [0, 1]; optimum is abnormal",
        sense: Sense::Maximize,
        params: vec![
            ParamSpec { name: "rho", default: 0.5, doc: "discount rate, 0 < ρ < 1" },
            ParamSpec { name: "a", default: 0.5, doc: "rate of the weight ν(t) = e^{-a t}" },
        ],
        predicates: vec![
            Predicate { label: "0 < rho < 1", check: |p| p["rho"] > 0.0 && p["rho"] < 1.0 },
            Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
        ],
        suites: vec!["admissible", "pmp"],
    }
}

fn halkin(p: &Params, req: &GridRequest) -> Result<Instance> {
    let (rho, a) = (p["rho"], p["a"]);
    let pb = ControlProblem::new(ProblemSpec {
        name: "halkin".into(),
        f: |_, x: &Vector, u: &Vector| x[0] - u[0],
        f_x: |_, _: &Vector, _: &Vector| v1(1.0),
        phi: |_, x: &Vector, u: &Vector| v1(u[0] * u[0] + x[0]),
        phi_x: |_, _: &Vector, _: &Vector| m1(1.0),
        control_set: ControlSet::interval(0.0, 1.0),
        x0: vec![0.0],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(a),
        p_exp: 2.0,
    })?;
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::from_closed_form(grid.clone(), ClosedForm::new(|_| v1(0.0), |_| v1(0.0), |_| v1(0.0)))?;
    // λ₀ = 0 and p = Z p(0) with p(0) = −1
    let padj = scalar_fn(&grid, |t| -(-t).exp(), |t| (-t).exp())?;
    let mut meta = EntryMeta::new(Sense::Maximize, &halkin_info().suites, DecayMode::P2, 0.5);
    meta.notes.push("only abnormal multipliers (λ₀ = 0, p(0) < 0) satisfy the maximum condition".into());
    Ok(Instance {
        name: "halkin".into(),
        params: Params::new(),
        problem: pb,
        reference: Some(cand),
        multipliers: pontryagin(0.0, padj)?,
        meta,
    })
}

fn nash_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec { name: "c1", default: 1.0, doc: "marginal cost of player 1" },
        ParamSpec { name: "c2", default: 2.0, doc: "marginal cost of player 2" },
        ParamSpec { name: "r", default: 0.5, doc: "decay rate of z = ln x" },
        ParamSpec { name: "alpha", default: 1.0, doc: "growth constant" },
        ParamSpec { name: "rho", default: 1.0, doc: "discount rate" },
        ParamSpec { name: "z0", default: 1.0, doc: "initial log stock" },
        ParamSpec { name: "a", default: 1.0, doc: "rate of the weight ν(t) = e^{-a t}" },
    ]
}

fn nash_predicates() -> Vec<Predicate> {
    vec![
        Predicate { label: "c1, c2, r, alpha, rho, z0 > 0", check: |p| pos(p, &["c1", "c2", "r", "alpha", "rho", "z0"]) },
        Predicate { label: "alpha > 1/(c1 + c2)", check: |p| p["alpha"] > 1.0 / (p["c1"] + p["c2"]) },
        Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
    ]
}

fn nash1_info() -> EntryInfo {
    EntryInfo {
        name: "nash_player1",
        summary: "player 1 of the harvesting game given player 2's equilibrium rate",
        sense: Sense::Maximize,
        params: nash_params(),
        predicates: nash_predicates(),
        suites: vec!["admissible", "pmp", "transversality", "michel", "sufficiency"],
    }
}

fn nash2_info() -> EntryInfo {
    EntryInfo { name: "nash_player2", summary: "player 2 of the harvesting game given player 1's equilibrium rate", ..nash1_info() }
}

/// Equilibrium rates `(u₁*, u₂*)` and the limit `c₀` of z.
pub fn nash_equilibrium(c1: f64, c2: f64, r: f64, alpha: f64) -> (f64, f64, f64) {
    let s = c1 + c2;
    (c2 / (s * s), c1 / (s * s), (alpha - 1.0 / s) / r)
}

fn nash(p: &Params, req: &GridRequest, player: usize) -> Result<Instance> {
    let p = P(p);
    let (c1, c2, r, alpha, rho) = (p.g("c1"), p.g("c2"), p.g("r"), p.g("alpha"), p.g("rho"));
    let (u1, u2, c0) = nash_equilibrium(c1, c2, r, alpha);
    let (own_c, own_u, other) = if player == 1 { (c1, u1, u2) } else { (c2, u2, u1) };
    let name = format!("nash_player{player}");
    let pb = ControlProblem::new(ProblemSpec {
        name: name.clone(),
        f: move |_, _: &Vector, u: &Vector| -(1.0 / (u[0] + other) - own_c) * u[0],
        f_x: |_, _: &Vector, _: &Vector| v1(0.0),
        phi: move |_, z: &Vector, u: &Vector| v1(-r * z[0] + alpha - u[0] - other),
        phi_x: move |_, _: &Vector, _: &Vector| m1(-r),
        control_set: ControlSet::nonnegative(),
        x0: vec![p.g("z0")],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(p.g("a")),
        p_exp: 2.0,
    })?
    .with_stationary(move |t, _, pv, l0| {
        // H_u = 0  ⇔  (u + b)² = λ₀ω b / (λ₀ω c + p)
        let w = l0 * (-rho * t).exp();
        let den = w * own_c + pv[0];
        if w > 0.0 && den > 0.0 {
            vec![v1(((w * other / den).sqrt() - other).max(0.0))]
        } else {
            Vec::new()
        }
    });
    let z0 = p.g("z0");
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::from_closed_form(
        grid.clone(),
        ClosedForm::new(
            move |t| v1((z0 - c0) * (-r * t).exp() + c0),
            move |t| v1(-r * (z0 - c0) * (-r * t).exp()),
            move |_| v1(own_u),
        ),
    )?;
    let padj = scalar_fn(&grid, |_| 0.0, |_| 0.0)?;
    let mut meta = EntryMeta::new(Sense::Maximize, &nash1_info().suites, DecayMode::P2, 0.5 * c0.min(z0));
    meta.values.insert("u1".into(), u1);
    meta.values.insert("u2".into(), u2);
    meta.values.insert("c0".into(), c0);
    Ok(Instance { name, params: Params::new(), problem: pb, reference: Some(cand), multipliers: pontryagin(1.0, padj)?, meta })
}

fn nash_player1(p: &Params, req: &GridRequest) -> Result<Instance> {
    nash(p, req, 1)
}

fn nash_player2(p: &Params, req: &GridRequest) -> Result<Instance> {
    nash(p, req, 2)
}

fn fishing_info() -> EntryInfo {
    EntryInfo {
        name: "fishing",
        summary: "sup ∫ e^{-ρt}(x − c)u, ẋ = r x(1 − x/K) − u x, u ∈ [0, u_max]; equilibrium reference",
        sense: Sense::Maximize,
        params: vec![
            ParamSpec { name: "r", default: 2.0, doc: "intrinsic growth rate" },
            ParamSpec { name: "rho", default: 1.0, doc: "discount rate" },
            ParamSpec { name: "K", default: 1.0, doc: "carrying capacity" },
            ParamSpec { name: "c", default: 0.0, doc: "unit harvesting cost" },
            ParamSpec { name: "u_max", default: 3.0, doc: "maximal effort" },
            ParamSpec { name: "a", default: 1.0, doc: "rate of the weight ν(t) = e^{-a t}" },
        ],
        predicates: vec![
            Predicate { label: "K > 0", check: |p| p["K"] > 0.0 },
            Predicate { label: "0 < rho < r < u_max", check: |p| 0.0 < p["rho"] && p["rho"] < p["r"] && p["r"] < p["u_max"] },
            Predicate { label: "0 <= c < K(r - rho)/(2r)", check: |p| p["c"] >= 0.0 && p["c"] < p["K"] * (p["r"] - p["rho"]) / (2.0 * p["r"]) },
            Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
        ],
        suites: vec!["admissible", "pmp", "transversality", "michel"],
    }
}

/// Steady state `(x̄, ū)` of the fishing model.
pub fn fishing_equilibrium(r: f64, rho: f64, k: f64) -> (f64, f64) {
    (k * (r - rho) / (2.0 * r), 0.5 * (r + rho))
}

/// Logistic growth minus harvest.
pub fn fishing_phi(r: f64, k: f64, x: f64, u: f64) -> f64 {
    r * x * (1.0 - x / k) - u * x
}

fn fishing(p: &Params, req: &GridRequest) -> Result<Instance> {
    let p = P(p);
    let (r, rho, k, c) = (p.g("r"), p.g("rho"), p.g("K"), p.g("c"));
    let pb = ControlProblem::new(ProblemSpec {
        name: "fishing".into(),
        f: move |_, x: &Vector, u: &Vector| -(x[0] - c) * u[0],
        f_x: |_, _: &Vector, u: &Vector| v1(-u[0]),
        phi: move |_, x: &Vector, u: &Vector| v1(fishing_phi(r, k, x[0], u[0])),
        phi_x: move |_, x: &Vector, u: &Vector| m1(r - 2.0 * r * x[0] / k - u[0]),
        control_set: ControlSet::interval(0.0, p.g("u_max")),
        x0: vec![fishing_equilibrium(r, rho, k).0],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(p.g("a")),
        p_exp: 2.0,
    })?;
    let (xb, ub) = fishing_equilibrium(r, rho, k);
    let grid = make_grid(req, 40.0 / rho, &[])?;
    let cand = CandidateProcess::from_closed_form(grid.clone(), ClosedForm::new(move |_| v1(xb), |_| v1(0.0), move |_| v1(ub)))?;
    // Singular arc: H_u = 0 gives p = ω (x̄ − c)/x̄.
    let s = (xb - c) / xb;
    let padj = scalar_fn(&grid, move |t| s * (-rho * t).exp(), move |t| -rho * s * (-rho * t).exp())?;
    let mut meta = EntryMeta::new(Sense::Maximize, &fishing_info().suites, DecayMode::P2, 0.5 * xb);
    meta.values.insert("x_bar".into(), xb);
    meta.values.insert("u_bar".into(), ub);
    if c != 0.0 {
        meta.notes.push("for c > 0 the equilibrium formula does not solve the adjoint equation".into());
    }
    Ok(Instance { name: "fishing".into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: pontryagin(1.0, padj)?, meta })
}

fn investment_info() -> EntryInfo {
    EntryInfo {
        name: "investment",
        summary: "sup ∫ e^{-ρt}(1 − u)√x, ẋ = γ u √x − δ x, u ∈ [0, 1]; equilibrium reference",
        sense: Sense::Maximize,
        params: vec![
            ParamSpec { name: "gamma", default: 1.0, doc: "investment efficiency" },
            ParamSpec { name: "rho", default: 1.0, doc: "discount rate" },
            ParamSpec { name: "delta", default: 1.0, doc: "depreciation rate" },
            ParamSpec { name: "a", default: 1.0, doc: "rate of the weight ν(t) = e^{-a t}" },
        ],
        predicates: vec![
            Predicate { label: "gamma, rho, delta > 0", check: |p| pos(p, &["gamma", "rho", "delta"]) },
            Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
        ],
        suites: vec!["admissible", "pmp", "transversality", "michel"],
    }
}

/// Steady state `(x̄, ū)` of the investment model.
pub fn investment_equilibrium(gamma: f64, rho: f64, delta: f64) -> (f64, f64) {
    let s = rho + delta;
    (gamma * gamma / (4.0 * s * s), delta / (2.0 * s))
}

pub fn investment_phi(gamma: f64, delta: f64, x: f64, u: f64) -> f64 {
    gamma * u * x.sqrt() - delta * x
}

fn investment(p: &Params, req: &GridRequest) -> Result<Instance> {
    let p = P(p);
    let (gamma, rho, delta) = (p.g("gamma"), p.g("rho"), p.g("delta"));
    let (xb, ub) = investment_equilibrium(gamma, rho, delta);
    let pb = ControlProblem::new(ProblemSpec {
        name: "investment".into(),
        f: |_, x: &Vector, u: &Vector| -(1.0 - u[0]) * x[0].sqrt(),
        f_x: |_, x: &Vector, u: &Vector| v1(-(1.0 - u[0]) / (2.0 * x[0].sqrt())),
        phi: move |_, x: &Vector, u: &Vector| v1(investment_phi(gamma, delta, x[0], u[0])),
        phi_x: move |_, x: &Vector, u: &Vector| m1(gamma * u[0] / (2.0 * x[0].sqrt()) - delta),
        control_set: ControlSet::interval(0.0, 1.0),
        x0: vec![xb],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(p.g("a")),
        p_exp: 2.0,
    })?;
    let grid = make_grid(req, 40.0 / rho, &[])?;
    let cand = CandidateProcess::from_closed_form(grid.clone(), ClosedForm::new(move |_| v1(xb), |_| v1(0.0), move |_| v1(ub)))?;
    // Singular arc: H_u = 0 gives p = ω/γ, which also solves the adjoint equation.
    let padj = scalar_fn(&grid, move |t| (-rho * t).exp() / gamma, move |t| -rho * (-rho * t).exp() / gamma)?;
    let mut meta = EntryMeta::new(Sense::Maximize, &investment_info().suites, DecayMode::P2, 0.5 * xb);
    meta.values.insert("x_bar".into(), xb);
    meta.values.insert("u_bar".into(), ub);
    Ok(Instance { name: "investment".into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: pontryagin(1.0, padj)?, meta })
}

fn terror_params(tau: f64, kappa: f64, u0: f64) -> Vec<ParamSpec> {
    vec![
        ParamSpec { name: "rho", default: 0.5, doc: "discount rate" },
        ParamSpec { name: "c", default: 1.0, doc: "cost per unit of x" },
        ParamSpec { name: "tau", default: tau, doc: "constant inflow" },
        ParamSpec { name: "kappa", default: kappa, doc: "endogenous growth" },
        ParamSpec { name: "epsilon", default: 0.1, doc: "control-induced growth" },
        ParamSpec { name: "mu", default: 0.5, doc: "natural outflow" },
        ParamSpec { name: "eta", default: 0.5, doc: "control-induced outflow" },
        ParamSpec { name: "alpha", default: 0.5, doc: "growth exponent in (0, 1)" },
        ParamSpec { name: "x0", default: 1.0, doc: "initial state" },
        ParamSpec { name: "u0", default: u0, doc: "constant control of the reference" },
        ParamSpec { name: "a", default: 0.5, doc: "rate of the weight ν(t) = e^{-a t}" },
    ]
}

fn terror_common_predicates() -> Vec<Predicate> {
    vec![
        Predicate { label: "epsilon, mu, eta, rho, x0 > 0", check: |p| pos(p, &["epsilon", "mu", "eta", "rho", "x0"]) },
        Predicate { label: "0 < alpha < 1", check: |p| p["alpha"] > 0.0 && p["alpha"] < 1.0 },
        Predicate { label: "u0 >= 0", check: |p| p["u0"] >= 0.0 },
        Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
    ]
}

fn terror_info() -> EntryInfo {
    let mut predicates = vec![
        Predicate { label: "tau >= 0", check: |p| p["tau"] >= 0.0 },
        Predicate { label: "kappa > 0", check: |p| p["kappa"] > 0.0 },
    ];
    predicates.extend(terror_common_predicates());
    EntryInfo {
        name: "terror",
        summary: "min ∫ e^{-ρt}(c x + u), ẋ = τ + (κ + εu)x^α − (μ + ηu)x, u ≥ 0; constant-control reference",
        sense: Sense::Minimize,
        params: terror_params(0.1, 0.5, 0.5),
        predicates,
        suites: vec!["admissible"],
    }
}

fn terror_degenerate_info() -> EntryInfo {
    let mut predicates = vec![Predicate { label: "tau = 0 and kappa = 0", check: |p| p["tau"] == 0.0 && p["kappa"] == 0.0 }];
    predicates.extend(terror_common_predicates());
    EntryInfo {
        name: "terror_degenerate",
        summary: "terror model with τ = κ = 0, whose trajectories may tend to 0",
        sense: Sense::Minimize,
        params: terror_params(0.0, 0.0, 0.0),
        predicates,
        suites: vec!["admissible"],
    }
}

fn terror_core(name: &str, p: &Params, req: &GridRequest, degenerate: bool) -> Result<Instance> {
    let p = P(p);
    let (c, tau, kappa, eps) = (p.g("c"), p.g("tau"), p.g("kappa"), p.g("epsilon"));
    let (mu, eta, alpha, u0) = (p.g("mu"), p.g("eta"), p.g("alpha"), p.g("u0"));
    let pb = ControlProblem::new(ProblemSpec {
        name: name.into(),
        f: move |_, x: &Vector, u: &Vector| c * x[0] + u[0],
        f_x: move |_, _: &Vector, _: &Vector| v1(c),
        phi: move |_, x: &Vector, u: &Vector| v1(tau + (kappa + eps * u[0]) * x[0].powf(alpha) - (mu + eta * u[0]) * x[0]),
        phi_x: move |_, x: &Vector, u: &Vector| m1(alpha * (kappa + eps * u[0]) * x[0].powf(alpha - 1.0) - (mu + eta * u[0])),
        control_set: ControlSet::nonnegative(),
        x0: vec![p.g("x0")],
        omega: DistributionSpec::exponential(p.g("rho")),
        nu: WeightSpec::exponential(p.g("a")),
        p_exp: 2.0,
    })?;
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::integrate(&pb, grid, move |_| v1(u0), crate::ode::DEFAULT_SUBSTEPS)?;
    let m = cand.x.values().iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    // A uniform tube must keep a fixed radius; with x → 0 it crosses 0.
    let gamma = if degenerate { 0.5 * p.g("x0") } else { 0.5 * m };
    let mut meta = EntryMeta::new(Sense::Minimize, &["admissible"], DecayMode::P2, gamma);
    if degenerate {
        meta.expected = Verdict::Fail;
        meta.notes.push("x(t) → 0, so a uniform tube of radius γ leaves the domain x > 0 and (A2) fails".into());
    }
    meta.values.insert("x_min".into(), m);
    meta.notes.push("reference is the constant-control process, not an optimum".into());
    Ok(Instance { name: name.into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: None, meta })
}

fn terror(p: &Params, req: &GridRequest) -> Result<Instance> {
    terror_core("terror", p, req, false)
}

fn terror_degenerate(p: &Params, req: &GridRequest) -> Result<Instance> {
    terror_core("terror_degenerate", p, req, true)
}

fn resource_info() -> EntryInfo {
    EntryInfo {
        name: "resource",
        summary: "sup ∫ e^{-ρt}[F(u) − r y − q u], ẋ = −u, ẏ = c F(u), x ≥ 0, u ≥ 0, F(u) = √(u+1)",
        sense: Sense::Maximize,
        params: vec![
            ParamSpec { name: "rho", default: 1.0, doc: "discount rate" },
            ParamSpec { name: "r", default: 0.1, doc: "cost per unit of waste" },
            ParamSpec { name: "c", default: 1.0, doc: "waste per unit of output" },
            ParamSpec { name: "q", default: 0.2, doc: "cost per unit of extraction" },
            ParamSpec { name: "x0", default: 2.0, doc: "initial resource stock" },
            ParamSpec { name: "y0", default: 0.0, doc: "initial waste stock" },
            ParamSpec { name: "a", default: 1.0, doc: "rate of the weight ν(t) = e^{-a t}" },
        ],
        predicates: vec![
            Predicate { label: "rho, r, c, q, x0 > 0", check: |p| pos(p, &["rho", "r", "c", "q", "x0"]) },
            Predicate { label: "y0 >= 0", check: |p| p["y0"] >= 0.0 },
            Predicate { label: "0 < a < 2 rho", check: |p| p["a"] > 0.0 && p["a"] < 2.0 * p["rho"] },
        ],
        suites: vec!["admissible", "constrained", "sufficiency"],
    }
}

/// F(u) = √(u+1) and its derivative.
pub fn resource_f(u: f64) -> f64 {
    (u + 1.0).sqrt()
}

pub fn resource_df(u: f64) -> f64 {
    0.5 / (u + 1.0).sqrt()
}

/// Regime of the resource model: `d = (ρ − r c)/ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResourceCase {
    /// `d F′(0) ≤ q`: no extraction.
    A,
    /// `d F′(0) > q` with `p₁(0) = 0`: no admissible solution.
    B,
    /// `d F′(0) > q` with `p₁(0) > 0`: exhaustion at a finite time t′.
    C,
}

/// Case predicates as computable conditions on `(d, q, F′(0))`.
pub fn resource_case(d: f64, q: f64, p1_at_zero_positive: bool) -> ResourceCase {
    if d * resource_df(0.0) <= q {
        ResourceCase::A
    } else if p1_at_zero_positive {
        ResourceCase::C
    } else {
        ResourceCase::B
    }
}

/// Closed-form case (C) solution with `A = d/2 − q` and `w = e^{ρ(t−t′)}`.
#[derive(Debug, Clone, Copy)]
pub struct ResourceCaseC {
    pub rho: f64,
    pub q: f64,
    pub d: f64,
    pub c: f64,
    pub x0: f64,
    pub y0: f64,
    pub big_a: f64,
    pub t_prime: f64,
}

impl ResourceCaseC {
    pub fn new(rho: f64, r: f64, c: f64, q: f64, x0: f64, y0: f64) -> Result<Self> {
        let d = (rho - r * c) / rho;
        let big_a = d * resource_df(0.0) - q;
        if !(big_a > 0.0) {
            return Err(Error::ParameterConstraintViolated("case (C) requires d F'(0) > q".into()));
        }
        let mut s = ResourceCaseC { rho, q, d, c, x0, y0, big_a, t_prime: 0.0 };
        let x_end = |tp: f64| {
            let mut z = s;
            z.t_prime = tp;
            z.x_before(tp)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while x_end(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NoMultiplierFound("exhaustion time not bracketed".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x_end(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        s.t_prime = 0.5 * (lo + hi);
        Ok(s)
    }

    fn w(&self, t: f64) -> f64 {
        (self.rho * (t - self.t_prime)).exp()
    }

    fn phi_big(&self, w: f64) -> f64 {
        let (q, a) = (self.q, self.big_a);
        ((w.ln() - (q + a * w).ln()) / (q * q) + 1.0 / (q * (q + a * w))) / self.rho
    }

    fn psi_big(&self, w: f64) -> f64 {
        (w.ln() - (self.q + self.big_a * w).ln()) / (self.rho * self.q)
    }

    fn x_before(&self, t: f64) -> f64 {
        let k = 0.25 * self.d * self.d;
        self.x0 + t - k * (self.phi_big(self.w(t)) - self.phi_big(self.w(0.0)))
    }

    fn y_before(&self, t: f64) -> f64 {
        self.y0 + 0.5 * self.c * self.d * (self.psi_big(self.w(t)) - self.psi_big(self.w(0.0)))
    }

    pub fn u(&self, t: f64) -> f64 {
        if t <= self.t_prime {
            let s = self.d / (2.0 * (self.q + self.big_a * self.w(t)));
            (s * s - 1.0).max(0.0)
        } else {
            0.0
        }
    }

    pub fn x(&self, t: f64) -> f64 {
        if t <= self.t_prime {
            self.x_before(t).max(0.0)
        } else {
            0.0
        }
    }

    /// y keeps growing with slope c F(0) = c after exhaustion.
    pub fn y(&self, t: f64) -> f64 {
        if t <= self.t_prime {
            self.y_before(t)
        } else {
            self.y_before(self.t_prime) + self.c * (t - self.t_prime)
        }
    }

    pub fn dy(&self, t: f64) -> f64 {
        self.c * resource_f(self.u(t))
    }

    pub fn p1(&self, t: f64) -> f64 {
        self.big_a * (-self.rho * t.max(self.t_prime)).exp()
    }

    pub fn dp1(&self, t: f64) -> f64 {
        if t <= self.t_prime {
            0.0
        } else {
            -self.rho * self.p1(t)
        }
    }

    /// Density of μ with respect to dt such that `∫_t^∞ ν dμ = p₁(t)`.
    pub fn density(&self, t: f64, nu: f64) -> f64 {
        if t <= self.t_prime {
            0.0
        } else {
            self.rho * self.big_a * (-self.rho * t).exp() / nu
        }
    }
}

fn resource(p: &Params, req: &GridRequest) -> Result<Instance> {
    let p = P(p);
    let (rho, r, c, q) = (p.g("rho"), p.g("r"), p.g("c"), p.g("q"));
    let (x0, y0) = (p.g("x0"), p.g("y0"));
    let pb = ControlProblem::new(ProblemSpec {
        name: "resource".into(),
        f: move |_, x: &Vector, u: &Vector| -(resource_f(u[0]) - r * x[1] - q * u[0]),
        f_x: move |_, _: &Vector, _: &Vector| v2(0.0, r),
        phi: move |_, _: &Vector, u: &Vector| v2(-u[0], c * resource_f(u[0])),
        phi_x: |_, _: &Vector, _: &Vector| DMatrix::zeros(2, 2),
        control_set: ControlSet::nonnegative(),
        x0: vec![x0, y0],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(p.g("a")),
        p_exp: 2.0,
    })?
    .with_constraint(nonneg_state(0, 2, "x >= 0"))
    .with_stationary(move |t, _, pv, l0| {
        // H_u = 0  ⇔  F′(u) = (p₁ + λ₀ω q)/(c p₂ + λ₀ω)
        let w = l0 * (-rho * t).exp();
        let (num, den) = (pv[0] + w * q, c * pv[1] + w);
        if num > 0.0 && den > 0.0 {
            let k = num / den;
            vec![v1((0.25 / (k * k) - 1.0).max(0.0))]
        } else {
            Vec::new()
        }
    });
    let d = (rho - r * c) / rho;
    let p2 = move |t: f64| -(r / rho) * (-rho * t).exp();
    let dp2 = move |t: f64| r * (-rho * t).exp();
    let mut meta = EntryMeta::new(Sense::Maximize, &resource_info().suites, DecayMode::P2, 0.5);
    meta.values.insert("d".into(), d);
    meta.notes.push("case (B) (d F'(0) > q with p1(0) = 0) has no admissible solution".into());
    let (cand, cm) = if resource_case(d, q, true) == ResourceCase::A {
        meta.case = Some("A".into());
        let grid = make_grid(req, 40.0, &[])?;
        let cand = CandidateProcess::from_closed_form(
            grid.clone(),
            ClosedForm::new(move |t| v2(x0, y0 + c * t), move |_| v2(0.0, c), |_| v1(0.0)),
        )?;
        let smooth = SampledFn::from_fn(grid.clone(), move |t| v2(0.0, p2(t)), Some(&move |t| v2(0.0, dp2(t))))?;
        let cm = ConstrainedMultipliers::new(1.0, smooth, Vec::new(), vec![ConstraintMeasure::zero(0, grid)])?;
        (cand, cm)
    } else {
        meta.case = Some("C".into());
        let sol = ResourceCaseC::new(rho, r, c, q, x0, y0)?;
        meta.values.insert("t_prime".into(), sol.t_prime);
        meta.values.insert("A".into(), sol.big_a);
        let grid = make_grid(req, 40.0, &[sol.t_prime])?;
        let cand = CandidateProcess::from_closed_form(
            grid.clone(),
            ClosedForm::new(move |t| v2(sol.x(t), sol.y(t)), move |t| v2(-sol.u(t), sol.dy(t)), move |t| v1(sol.u(t))),
        )?;
        let smooth = SampledFn::from_fn(
            grid.clone(),
            move |t| v2(sol.p1(t), p2(t)),
            Some(&move |t| v2(sol.dp1(t), dp2(t))),
        )?;
        let nu = pb.nu.clone();
        let dens = SampledFn::scalar(grid.clone(), move |t| sol.density(t, nu.eval(t).unwrap_or(f64::NAN)), None)?;
        let m = ConstraintMeasure::new(0, dens, Vec::new(), 0.0)?;
        let cm = ConstrainedMultipliers::new(1.0, smooth, Vec::new(), vec![m])?;
        (cand, cm)
    };
    Ok(Instance {
        name: "resource".into(),
        params: Params::new(),
        problem: pb,
        reference: Some(cand),
        multipliers: Some(Multipliers::Constrained(cm)),
        meta,
    })
}

fn weibull_info() -> EntryInfo {
    EntryInfo {
        name: "weibull_harvest",
        summary: "sup ∫ ω(t) u/(1 + u²) with Weibull ω, ẋ = −x + u, u ≥ 0",
        sense: Sense::Maximize,
        params: vec![
            ParamSpec { name: "k", default: 0.5, doc: "Weibull shape, 0 < k < 1" },
            ParamSpec { name: "nu_a", default: 2.0, doc: "exponent of the weight ν(t) = (1+t)^{-a}" },
            ParamSpec { name: "p", default: 3.0, doc: "Sobolev exponent" },
            ParamSpec { name: "x0", default: 2.0, doc: "initial state" },
        ],
        predicates: vec![
            Predicate { label: "0 < k < 1", check: |p| p["k"] > 0.0 && p["k"] < 1.0 },
            Predicate { label: "nu_a > 1", check: |p| p["nu_a"] > 1.0 },
            Predicate { label: "p > 1/k", check: |p| p["p"] > 1.0 / p["k"] },
        ],
        suites: vec!["admissible", "pmp", "transversality", "michel"],
    }
}

fn weibull_harvest(p: &Params, req: &GridRequest) -> Result<Instance> {
    let p = P(p);
    let x0 = p.g("x0");
    let pb = ControlProblem::new(ProblemSpec {
        name: "weibull_harvest".into(),
        f: |_, _: &Vector, u: &Vector| -u[0] / (1.0 + u[0] * u[0]),
        f_x: |_, _: &Vector, _: &Vector| v1(0.0),
        phi: |_, x: &Vector, u: &Vector| v1(-x[0] + u[0]),
        phi_x: |_, _: &Vector, _: &Vector| m1(-1.0),
        control_set: ControlSet::nonnegative(),
        x0: vec![x0],
        omega: DistributionSpec::weibull(p.g("k")),
        nu: WeightSpec::power_law(p.g("nu_a")),
        p_exp: p.g("p"),
    })?
    .with_stationary(|_, _, _, _| vec![v1(1.0)]);
    let grid = make_grid(req, 200.0, &[])?;
    let cand = CandidateProcess::from_closed_form(
        grid.clone(),
        ClosedForm::new(
            move |t| v1(1.0 + (x0 - 1.0) * (-t).exp()),
            move |t| v1(-(x0 - 1.0) * (-t).exp()),
            |_| v1(1.0),
        ),
    )?;
    let padj = scalar_fn(&grid, |_| 0.0, |_| 0.0)?;
    let meta = EntryMeta::new(Sense::Maximize, &weibull_info().suites, DecayMode::General, 0.5);
    Ok(Instance { name: "weibull_harvest".into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: pontryagin(1.0, padj)?, meta })
}

fn pathology_info() -> EntryInfo {
    EntryInfo {
        name: "truncation_pathology",
        summary: "sup ∫ (1 − u)x, ẋ = u x, x(0) = 1, u ∈ [0, 1]; truncated optima converge to the global minimum",
        sense: Sense::Maximize,
        params: vec![ParamSpec { name: "a", default: 3.0, doc: "rate of the weight ν(t) = e^{-a t}" }],
        predicates: vec![Predicate { label: "a > 2", check: |p| p["a"] > 2.0 }],
        suites: vec!["admissible"],
    }
}

fn truncation_pathology(p: &Params, req: &GridRequest) -> Result<Instance> {
    let pb = ControlProblem::new(ProblemSpec {
        name: "truncation_pathology".into(),
        f: |_, x: &Vector, u: &Vector| -(1.0 - u[0]) * x[0],
        f_x: |_, _: &Vector, u: &Vector| v1(-(1.0 - u[0])),
        phi: |_, x: &Vector, u: &Vector| v1(u[0] * x[0]),
        phi_x: |_, _: &Vector, u: &Vector| m1(u[0]),
        control_set: ControlSet::interval(0.0, 1.0),
        x0: vec![1.0],
        // Undiscounted: ω ≡ 1.
        omega: DistributionSpec::exponential(0.0),
        nu: WeightSpec::exponential(p["a"]),
        p_exp: 2.0,
    })?;
    let grid = make_grid(req, 20.0, &[])?;
    // Pointwise limit of the truncated optima.
    let cand = CandidateProcess::from_closed_form(grid, ClosedForm::new(|t| v1(t.exp()), |t| v1(t.exp()), |_| v1(1.0)))?;
    let mut meta = EntryMeta::new(Sense::Maximize, &pathology_info().suites, DecayMode::P2, 0.5);
    meta.notes.push("reference is the pointwise limit x = e^t, u = 1 of the truncated optima".into());
    meta.values.insert("limit_value".into(), 0.0);
    Ok(Instance { name: "truncation_pathology".into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: None, meta })
}

fn decay_info() -> EntryInfo {
    EntryInfo {
        name: "decay_example",
        summary: "min ∫ e^{-ρt}[−u x e^{ρt}], ẋ = −u x, x(0) = 1, u ∈ [0, 1]; J_T = x(T) − 1",
        sense: Sense::Minimize,
        params: vec![
            ParamSpec { name: "rho", default: 1.0, doc: "discount rate" },
            ParamSpec { name: "a", default: 1.0, doc: "rate of the weight ν(t) = e^{-a t}" },
        ],
        predicates: vec![
            Predicate { label: "rho > 0", check: |p| p["rho"] > 0.0 },
            Predicate { label: "a > 0", check: |p| p["a"] > 0.0 },
        ],
        suites: vec!["admissible"],
    }
}

fn decay_example(p: &Params, req: &GridRequest) -> Result<Instance> {
    let rho = p["rho"];
    let pb = ControlProblem::new(ProblemSpec {
        name: "decay_example".into(),
        f: move |t, x: &Vector, u: &Vector| -u[0] * x[0] * (rho * t).exp(),
        f_x: move |t, _: &Vector, u: &Vector| v1(-u[0] * (rho * t).exp()),
        phi: |_, x: &Vector, u: &Vector| v1(-u[0] * x[0]),
        phi_x: |_, _: &Vector, u: &Vector| m1(-u[0]),
        control_set: ControlSet::interval(0.0, 1.0),
        x0: vec![1.0],
        omega: DistributionSpec::exponential(rho),
        nu: WeightSpec::exponential(p["a"]),
        p_exp: 2.0,
    })?;
    let grid = make_grid(req, 40.0, &[])?;
    let cand = CandidateProcess::from_closed_form(grid, ClosedForm::new(|t| v1((-t).exp()), |t| v1(-(-t).exp()), |_| v1(1.0)))?;
    let mut meta = EntryMeta::new(Sense::Minimize, &decay_info().suites, DecayMode::P2, 0.5);
    meta.notes.push("every admissible process with x(t) → 0 is globally optimal; u ≡ 1 overtakes all of them".into());
    Ok(Instance { name: "decay_example".into(), params: Params::new(), problem: pb, reference: Some(cand), multipliers: None, meta })
}

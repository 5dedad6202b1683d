//! Control problems given by callables, candidate processes, tubes and the
//! assumption / admissibility checkers.

use crate::error::{Error, Result};
use crate::quad::{self, Settle};
use crate::report::Verdict;
use crate::spaces::{self, Grid, SampledFn};
use crate::weights::{DistributionSpec, WeightSpec};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// `(t, x, u) ↦ ℝ`
pub type ScalarFn = Arc<dyn Fn(f64, &Vector, &Vector) -> f64 + Send + Sync>;
/// `(t, x, u) ↦ ℝⁿ`
pub type VectorFn = Arc<dyn Fn(f64, &Vector, &Vector) -> Vector + Send + Sync>;
/// `(t, x, u) ↦ ℝ^{n×n}`
pub type MatrixFn = Arc<dyn Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync>;
/// `(t, x, p, λ₀) ↦` candidate maximizers of the Pontryagin function.
pub type StationaryFn = Arc<dyn Fn(f64, &Vector, &Vector, f64) -> Vec<Vector> + Send + Sync>;
/// `t ↦ ℝᵏ`
pub type CurveFn = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

/// `(t, x) ↦ ℝ`
pub type ScalarStateFn = Arc<dyn Fn(f64, &Vector) -> f64 + Send + Sync>;
/// `(t, x) ↦ ℝⁿ`
pub type VectorStateFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;

#[derive(Clone)]
pub struct StateConstraint {
    pub name: String,
    pub g: ScalarStateFn,
    pub g_x: VectorStateFn,
}

impl StateConstraint {
    pub fn new(
        name: &str,
        g: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static,
        g_x: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        StateConstraint {
            name: name.to_string(),
            g: Arc::new(g),
            g_x: Arc::new(g_x),
        }
    }
}

impl fmt::Debug for StateConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateConstraint({})", self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlSet {
    /// Coordinate bounds; infinite bounds allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    FiniteSample(Vec<Vec<f64>>),
    /// `u_i ≥ lower_i`.
    HalfLine { lower: Vec<f64> },
}

impl ControlSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        ControlSet::Box { lower: vec![lo], upper: vec![hi] }
    }

    pub fn real_line() -> Self {
        ControlSet::interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn nonnegative() -> Self {
        ControlSet::HalfLine { lower: vec![0.0] }
    }

    pub fn dim(&self) -> usize {
        match self {
            ControlSet::Box { lower, .. } => lower.len(),
            ControlSet::FiniteSample(v) => v.first().map_or(0, Vec::len),
            ControlSet::HalfLine { lower } => lower.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ControlSet::Box { lower, upper } => {
                !lower.is_empty()
                    && lower.len() == upper.len()
                    && lower.iter().zip(upper).all(|(l, u)| l <= u && !l.is_nan() && !u.is_nan())
            }
            ControlSet::FiniteSample(v) => {
                !v.is_empty() && !v[0].is_empty() && v.iter().all(|u| u.len() == v[0].len())
            }
            ControlSet::HalfLine { lower } => !lower.is_empty() && lower.iter().all(|l| l.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("control set is empty or malformed".into()))
        }
    }

    /// Lower and upper bound of coordinate `k` (±∞ where unbounded).
    pub fn bounds(&self, k: usize) -> (f64, f64) {
        match self {
            ControlSet::Box { lower, upper } => (lower[k], upper[k]),
            ControlSet::HalfLine { lower } => (lower[k], f64::INFINITY),
            ControlSet::FiniteSample(v) => {
                let lo = v.iter().map(|u| u[k]).fold(f64::INFINITY, f64::min);
                let hi = v.iter().map(|u| u[k]).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        (0..self.dim()).all(|k| {
            let (l, u) = self.bounds(k);
            l.is_finite() && u.is_finite()
        })
    }

    /// Distance-free membership test with tolerance `tol`.
    pub fn contains(&self, u: &Vector, tol: f64) -> bool {
        if u.len() != self.dim() || u.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ControlSet::FiniteSample(v) => v
                .iter()
                .any(|s| s.iter().zip(u.iter()).all(|(a, b)| (a - b).abs() <= tol)),
            _ => (0..self.dim()).all(|k| {
                let (l, h) = self.bounds(k);
                u[k] >= l - tol && u[k] <= h + tol
            }),
        }
    }

    /// True when `u` lies strictly inside the coordinate bounds (by `margin`).
    pub fn interior(&self, u: &Vector, margin: f64) -> bool {
        match self {
            ControlSet::FiniteSample(_) => false,
            _ => (0..self.dim()).all(|k| {
                let (l, h) = self.bounds(k);
                u[k] > l + margin && u[k] < h - margin
            }),
        }
    }
}

/// Infinite-horizon problem: minimize `∫ ω f` subject to `ẋ = φ`, `x(0) = x₀`,
/// `u ∈ U` and `g_j(t, x) ≤ 0`.
#[derive(Clone)]
pub struct ControlProblem {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub f: ScalarFn,
    pub f_x: VectorFn,
    pub phi: VectorFn,
    pub phi_x: MatrixFn,
    pub constraints: Vec<StateConstraint>,
    pub control_set: ControlSet,
    pub x0: Vector,
    pub omega: DistributionSpec,
    pub nu: WeightSpec,
    pub p_exp: f64,
    /// Optional analytic maximizers of H(t, x, ·, p, λ₀) added to every sampler.
    pub stationary: Option<StationaryFn>,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("constraints", &self.constraints)
            .field("control_set", &self.control_set)
            .field("x0", &self.x0.as_slice())
            .field("omega", &self.omega.to_string())
            .field("nu", &self.nu.to_string())
            .field("p_exp", &self.p_exp)
            .finish()
    }
}

/// Builder input for [`ControlProblem::new`].
pub struct ProblemSpec<F, Fx, P, Px>
where
    F: Fn(f64, &Vector, &Vector) -> f64 + Send + Sync + 'static,
    Fx: Fn(f64, &Vector, &Vector) -> Vector + Send + Sync + 'static,
    P: Fn(f64, &Vector, &Vector) -> Vector + Send + Sync + 'static,
    Px: Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync + 'static,
{
    pub name: String,
    pub f: F,
    pub f_x: Fx,
    pub phi: P,
    pub phi_x: Px,
    pub control_set: ControlSet,
    pub x0: Vec<f64>,
    pub omega: DistributionSpec,
    pub nu: WeightSpec,
    pub p_exp: f64,
}

impl ControlProblem {
    pub fn new<F, Fx, P, Px>(spec: ProblemSpec<F, Fx, P, Px>) -> Result<Self>
    where
        F: Fn(f64, &Vector, &Vector) -> f64 + Send + Sync + 'static,
        Fx: Fn(f64, &Vector, &Vector) -> Vector + Send + Sync + 'static,
        P: Fn(f64, &Vector, &Vector) -> Vector + Send + Sync + 'static,
        Px: Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync + 'static,
    {
        spec.control_set.validate()?;
        let n = spec.x0.len();
        let m = spec.control_set.dim();
        if n == 0 || m == 0 {
            return Err(Error::Config("state and control dimensions must be positive".into()));
        }
        if !(spec.p_exp > 1.0) {
            return Err(Error::Config("Sobolev exponent must exceed 1".into()));
        }
        Ok(ControlProblem {
            name: spec.name,
            n,
            m,
            f: Arc::new(spec.f),
            f_x: Arc::new(spec.f_x),
            phi: Arc::new(spec.phi),
            phi_x: Arc::new(spec.phi_x),
            constraints: Vec::new(),
            control_set: spec.control_set,
            x0: DVector::from_vec(spec.x0),
            omega: spec.omega,
            nu: spec.nu,
            p_exp: spec.p_exp,
            stationary: None,
        })
    }

    pub fn with_constraint(mut self, c: StateConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn without_constraints(mut self) -> Self {
        self.constraints.clear();
        self
    }

    pub fn with_stationary(
        mut self,
        s: impl Fn(f64, &Vector, &Vector, f64) -> Vec<Vector> + Send + Sync + 'static,
    ) -> Self {
        self.stationary = Some(Arc::new(s));
        self
    }

    /// `H(t,x,u,p,λ₀) = −λ₀ ω(t) f(t,x,u) + ⟨p, φ(t,x,u)⟩`. The cost term is
    /// dropped when λ₀ = 0 so that a singular ω(0) does not poison H.
    pub fn hamiltonian(&self, t: f64, x: &Vector, u: &Vector, p: &Vector, lambda0: f64) -> f64 {
        let cost = if lambda0 == 0.0 { 0.0 } else { -lambda0 * self.omega.eval(t) * (self.f)(t, x, u) };
        cost + p.dot(&(self.phi)(t, x, u))
    }

    /// `∂H/∂x = −λ₀ ω f_x + φ_xᵀ p`.
    pub fn hamiltonian_x(&self, t: f64, x: &Vector, u: &Vector, p: &Vector, lambda0: f64) -> Vector {
        let mut h = (self.phi_x)(t, x, u).transpose() * p;
        if lambda0 != 0.0 {
            h -= (self.f_x)(t, x, u) * (lambda0 * self.omega.eval(t));
        }
        h
    }

    /// Default state probes for transversality checks: the unit vectors.
    pub fn unit_vectors(&self) -> Vec<Vector> {
        (0..self.n)
            .map(|k| {
                let mut e = DVector::zeros(self.n);
                e[k] = 1.0;
                e
            })
            .collect()
    }
}

/// Uniform neighbourhood `{(t, x) : ‖x − reference(t)‖ ≤ γ}`.
#[derive(Debug, Clone)]
pub struct Tube {
    pub reference: SampledFn,
    pub gamma: f64,
}

impl Tube {
    pub fn new(reference: SampledFn, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Config("tube radius must be positive".into()));
        }
        Ok(Tube { reference, gamma })
    }
}

/// Analytic description of a process, used for off-grid evaluation.
#[derive(Clone)]
pub struct ClosedForm {
    pub x: CurveFn,
    pub dx: CurveFn,
    pub u: CurveFn,
}

impl ClosedForm {
    pub fn new(
        x: impl Fn(f64) -> Vector + Send + Sync + 'static,
        dx: impl Fn(f64) -> Vector + Send + Sync + 'static,
        u: impl Fn(f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        ClosedForm { x: Arc::new(x), dx: Arc::new(dx), u: Arc::new(u) }
    }
}

/// A process `(x, u)` sampled on a common grid.
#[derive(Clone)]
pub struct CandidateProcess {
    pub x: SampledFn,
    pub u: SampledFn,
    pub closed_form: Option<ClosedForm>,
}

impl fmt::Debug for CandidateProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CandidateProcess")
            .field("nodes", &self.x.len())
            .field("n", &self.x.dim())
            .field("m", &self.u.dim())
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl CandidateProcess {
    pub fn new(x: SampledFn, u: SampledFn) -> Result<Self> {
        if x.times() != u.times() {
            return Err(Error::GridMismatch("state and control must share the grid".into()));
        }
        Ok(CandidateProcess { x, u, closed_form: None })
    }

    /// Samples an analytic process on `grid`.
    pub fn from_closed_form(grid: Arc<Grid>, cf: ClosedForm) -> Result<Self> {
        let x = SampledFn::from_fn(grid.clone(), |t| (cf.x)(t), Some(&|t| (cf.dx)(t)))?;
        let u = SampledFn::from_fn(grid, |t| (cf.u)(t), None)?;
        Ok(CandidateProcess { x, u, closed_form: Some(cf) })
    }

    /// Integrates `ẋ = φ(t, x, u(t))` from `x₀` with RK4 for a given control law.
    pub fn integrate(
        pb: &ControlProblem,
        grid: Arc<Grid>,
        control: impl Fn(f64) -> Vector + Send + Sync + 'static,
        substeps: usize,
    ) -> Result<Self> {
        let t = grid.nodes().to_vec();
        let phi = pb.phi.clone();
        let xs = crate::ode::rk4_along(&t, pb.x0.clone(), |s, x| phi(s, x, &control(s)), |x| x.norm(), substeps)?;
        let dx: Vec<Vector> = t.iter().zip(&xs).map(|(&s, x)| phi(s, x, &control(s))).collect();
        let us: Vec<Vector> = t.iter().map(|&s| control(s)).collect();
        let x = SampledFn::new(grid.clone(), xs, Some(dx))?;
        let u = SampledFn::new(grid, us, None)?;
        Ok(CandidateProcess { x, u, closed_form: None })
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    pub fn times(&self) -> &[f64] {
        self.x.times()
    }

    pub fn state_at(&self, t: f64) -> Vector {
        match &self.closed_form {
            Some(cf) => (cf.x)(t),
            None => self.x.value_at(t),
        }
    }

    pub fn control_at(&self, t: f64) -> Vector {
        match &self.closed_form {
            Some(cf) => (cf.u)(t),
            None => {
                let ts = self.u.times();
                if t >= *ts.last().unwrap() {
                    return self.u.value(self.u.len() - 1).clone();
                }
                let i = quad::locate(ts, t.max(0.0));
                if self.u.grid().jumps().contains(&i) {
                    return self.u.value(i).clone();
                }
                let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
                self.u.value(i) * (1.0 - s) + self.u.value(i + 1) * s
            }
        }
    }

    /// Replaces the grid by `grid`, resampling through the closed form.
    pub fn resampled(&self, grid: Arc<Grid>) -> Result<Self> {
        match &self.closed_form {
            Some(cf) => CandidateProcess::from_closed_form(grid, cf.clone()),
            None => Err(Error::UnsupportedProblem("resampling needs a closed form".into())),
        }
    }
}

fn finite_or_domain_error(t: f64, what: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::EvaluationDomainError { t, detail: format!("{what} not finite") })
    }
}

/// `max_i ‖ẋ(t_i) − φ(t_i, x_i, u_i)‖ / max(1, ‖φ‖)` over interior nodes.
pub fn check_dynamics_residual(pb: &ControlProblem, cand: &CandidateProcess) -> f64 {
    let dx = cand.x.derivative_or_fd();
    let t = cand.times();
    let n = t.len();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let phi = (pb.phi)(t[i], cand.x.value(i), cand.u.value(i));
        let r = (&dx[i] - &phi).norm() / phi.norm().max(1.0);
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c0_estimate: f64,
    /// Estimates at successive sample refinements.
    pub levels: Vec<f64>,
    pub verdict: Verdict,
}

/// Estimates the (A2) constant C₀ on a cross pattern inside the tube.
pub fn check_a2_growth(pb: &ControlProblem, tube: &Tube, u: &SampledFn) -> Result<GrowthReport> {
    if u.times() != tube.reference.times() {
        return Err(Error::GridMismatch("control and tube reference must share the grid".into()));
    }
    let t = tube.reference.times();
    let n = pb.n;
    let sample = |i: usize, x: &Vector| -> Result<f64> {
        let ui = u.value(i);
        let f = (pb.f)(t[i], x, ui);
        let phi = (pb.phi)(t[i], x, ui);
        let fx = (pb.f_x)(t[i], x, ui);
        let px = (pb.phi_x)(t[i], x, ui);
        let val = (f * f + phi.norm_squared()).sqrt() / (1.0 + x.norm());
        let der = (fx.norm_squared() + px.norm_squared()).sqrt();
        finite_or_domain_error(t[i], "f, φ or their derivatives", val.is_finite() && der.is_finite())?;
        Ok(val.max(der))
    };
    let mut levels = Vec::new();
    for level in 0..4u32 {
        let stride = 1usize << (3 - level);
        let rings = 1usize << level;
        let mut c0 = 0.0f64;
        let mut i = 0;
        while i < t.len() {
            let xr = tube.reference.value(i);
            c0 = c0.max(sample(i, xr)?);
            for j in 1..=rings {
                let r = tube.gamma * j as f64 / rings as f64;
                for k in 0..n {
                    for sgn in [-1.0, 1.0] {
                        let mut x = xr.clone();
                        x[k] += sgn * r;
                        c0 = c0.max(sample(i, &x)?);
                    }
                }
            }
            i += stride;
        }
        levels.push(c0);
    }
    let last = levels[3];
    let prev = levels[2];
    let verdict = if last <= prev * (1.0 + 1e-2) {
        Verdict::Pass
    } else if last > prev * 1.5 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(GrowthReport { c0_estimate: last, levels, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityTolerances {
    /// Relative derivative residual tolerance.
    pub dynamics: f64,
    /// Absolute tolerance on control membership and constraint values.
    pub constraint: f64,
}

impl Default for AdmissibilityTolerances {
    fn default() -> Self {
        AdmissibilityTolerances { dynamics: 1e-6, constraint: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityItem {
    pub id: String,
    pub verdict: Verdict,
    pub value: f64,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub items: Vec<AdmissibilityItem>,
}

impl AdmissibilityReport {
    pub fn item(&self, id: &str) -> Option<&AdmissibilityItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn summary(&self) -> Verdict {
        Verdict::combine(self.items.iter().map(|i| i.verdict))
    }
}

fn settle_item(id: &str, settle: Settle, value: f64, note: &str) -> AdmissibilityItem {
    let verdict = match settle {
        Settle::Plateau | Settle::Geometric => Verdict::Pass,
        Settle::Diverged => Verdict::Fail,
        Settle::Unsettled => Verdict::Inconclusive,
    };
    AdmissibilityItem {
        id: id.into(),
        verdict,
        value,
        tolerance: quad::PLATEAU_RTOL,
        note: format!("{note}: {settle:?}"),
    }
}

/// Partial cost integrals `∫_0^T ω f` at `T_max/8, …, T_max` and their verdict.
pub fn cost_integral(pb: &ControlProblem, cand: &CandidateProcess) -> (Settle, f64) {
    let grid = cand.grid();
    if pb.omega.singular_at_zero() {
        let big_f = |t: f64| (pb.f)(t, &cand.state_at(t), &cand.control_at(t));
        let vals: Vec<f64> = [0.125, 0.25, 0.5, 1.0]
            .iter()
            .map(|fr| pb.omega.integrate_against(&big_f, fr * grid.t_max(), 2 * grid.len()))
            .collect();
        quad::classify_doublings(&vals)
    } else {
        let y: Vec<f64> = cand
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| pb.omega.eval(t) * (pb.f)(t, cand.x.value(i), cand.u.value(i)))
            .collect();
        spaces::doubling_partials(grid, &y)
    }
}

/// Items: initial state, (i) dynamics, (ii) controls in U, (iii) finite
/// W¹_p(ν) norm, (iv) finite cost, (v) state constraints.
pub fn check_admissible(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    tol: &AdmissibilityTolerances,
) -> AdmissibilityReport {
    let mut items = Vec::new();
    let x0_err = (cand.x.value(0) - &pb.x0).norm();
    let x0_tol = 1e-12 * pb.x0.norm().max(1.0);
    items.push(AdmissibilityItem {
        id: "initial_state".into(),
        verdict: Verdict::from_bool(x0_err <= x0_tol),
        value: x0_err,
        tolerance: x0_tol,
        note: "‖x(0) − x₀‖".into(),
    });
    let dyn_res = check_dynamics_residual(pb, cand);
    items.push(AdmissibilityItem {
        id: "dynamics".into(),
        verdict: Verdict::from_bool(dyn_res <= tol.dynamics),
        value: dyn_res,
        tolerance: tol.dynamics,
        note: "max ‖ẋ − φ‖ / max(1, ‖φ‖)".into(),
    });
    let mut worst_u = 0.0f64;
    for i in 0..cand.u.len() {
        let u = cand.u.value(i);
        if !pb.control_set.contains(u, tol.constraint) {
            let excess = (0..pb.m)
                .map(|k| {
                    let (l, h) = pb.control_set.bounds(k);
                    (l - u[k]).max(u[k] - h).max(0.0)
                })
                .fold(0.0, f64::max);
            worst_u = worst_u.max(if excess.is_finite() && excess > 0.0 { excess } else { f64::INFINITY });
        }
    }
    items.push(AdmissibilityItem {
        id: "controls".into(),
        verdict: Verdict::from_bool(worst_u <= tol.constraint),
        value: worst_u,
        tolerance: tol.constraint,
        note: "largest violation of u(t) ∈ U".into(),
    });
    let xd = cand.x.clone().with_fd_derivatives();
    match spaces::w1p_finiteness(&xd, &pb.nu, pb.p_exp) {
        Ok((settle, value)) => items.push(settle_item("state_norm", settle, value, "∫(‖x‖^p + ‖ẋ‖^p)ν")),
        Err(e) => items.push(AdmissibilityItem {
            id: "state_norm".into(),
            verdict: Verdict::Inconclusive,
            value: f64::NAN,
            tolerance: quad::PLATEAU_RTOL,
            note: e.to_string(),
        }),
    }
    let (settle, value) = cost_integral(pb, cand);
    let mut cost = settle_item("cost", settle, value, "∫ω f (minimization form)");
    if settle == Settle::Diverged {
        cost.note.push_str(if value > 0.0 { ", diverges to +∞" } else { ", diverges to −∞" });
    }
    items.push(cost);
    let mut worst_g = f64::NEG_INFINITY;
    for c in &pb.constraints {
        for (i, &t) in cand.times().iter().enumerate() {
            let g = (c.g)(t, cand.x.value(i));
            worst_g = worst_g.max(if g.is_nan() { f64::INFINITY } else { g });
        }
    }
    items.push(AdmissibilityItem {
        id: "state_constraints".into(),
        verdict: Verdict::from_bool(worst_g <= tol.constraint),
        value: if pb.constraints.is_empty() { 0.0 } else { worst_g },
        tolerance: tol.constraint,
        note: "max_j sup_t g_j(t, x(t))".into(),
    });
    AdmissibilityReport { items }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveEntry {
    pub index: usize,
    pub name: String,
    pub sup: f64,
    pub active: bool,
    /// The supremum 0 is only approached as t → ∞.
    pub attained_at_infinity: bool,
    /// Nodes with |g_j| ≤ tol.
    pub active_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub entries: Vec<ActiveEntry>,
}

impl ActiveSet {
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().filter(|e| e.active).map(|e| e.index).collect()
    }
}

fn approaches_zero_from_below(grid: &Grid, g: &[f64], tol: f64) -> bool {
    let s = grid.tail_start();
    let tail = &g[s..];
    if tail.iter().any(|v| !(*v < -tol)) || tail.windows(2).any(|w| w[1] < w[0]) {
        return false;
    }
    let (a, b, c) = (tail[0], tail[tail.len() / 2], tail[tail.len() - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let denom = d2 - d1;
    if d1 <= 0.0 || denom >= 0.0 {
        return c.abs() <= tol;
    }
    let limit = c - d2 * d2 / denom;
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    limit.abs() <= tol.max(1e-8 * scale)
}

/// Active constraints `{ j : sup_t g_j(t, x(t)) ≥ −tol }`, with their active
/// times. A supremum of 0 approached only in the limit t → ∞ counts as active.
pub fn active_indices(pb: &ControlProblem, x: &SampledFn, tol: f64) -> ActiveSet {
    let entries = pb
        .constraints
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let g: Vec<f64> = x.times().iter().zip(x.values()).map(|(&t, v)| (c.g)(t, v)).collect();
            let sup = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let finite_active = sup >= -tol;
            let at_inf = !finite_active && approaches_zero_from_below(x.grid(), &g, tol);
            ActiveEntry {
                index: j,
                name: c.name.clone(),
                sup: if at_inf { 0.0 } else { sup },
                active: finite_active || at_inf,
                attained_at_infinity: at_inf,
                active_times: x
                    .times()
                    .iter()
                    .zip(&g)
                    .filter(|(_, v)| v.abs() <= tol)
                    .map(|(t, _)| *t)
                    .collect(),
            }
        })
        .collect();
    ActiveSet { entries }
}

/// Condition (F): every active constraint is strictly inactive at some node.
pub fn check_condition_f(pb: &ControlProblem, x: &SampledFn, tol: f64) -> Verdict {
    let act = active_indices(pb, x, tol);
    let ok = act.indices().iter().all(|&j| {
        let c = &pb.constraints[j];
        x.times().iter().zip(x.values()).any(|(&t, v)| (c.g)(t, v) < -tol)
    });
    Verdict::from_bool(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{DistributionSpec, WeightSpec};

    fn linear_problem() -> ControlProblem {
        ControlProblem::new(ProblemSpec {
            name: "linear".into(),
            f: |_, x: &Vector, _: &Vector| x[0],
            f_x: |_, _: &Vector, _: &Vector| DVector::from_element(1, 1.0),
            phi: |_, x: &Vector, u: &Vector| DVector::from_element(1, 2.0 * x[0] + u[0]),
            phi_x: |_, _: &Vector, _: &Vector| DMatrix::from_element(1, 1, 2.0),
            control_set: ControlSet::real_line(),
            x0: vec![1.0],
            omega: DistributionSpec::exponential(2.0),
            nu: WeightSpec::exponential(3.0),
            p_exp: 2.0,
        })
        .unwrap()
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let pb = linear_problem();
        let g = Arc::new(Grid::default_grid(10.0, 256).unwrap());
        let cand = CandidateProcess::from_closed_form(
            g,
            ClosedForm::new(
                |_| DVector::from_element(1, 1.0),
                |_| DVector::from_element(1, 0.0),
                |_| DVector::from_element(1, -2.0),
            ),
        )
        .unwrap();
        assert_eq!(check_dynamics_residual(&pb, &cand), 0.0);
    }

    #[test]
    fn linear_growth_constant_is_tube_independent() {
        let pb = linear_problem();
        let g = Arc::new(Grid::default_grid(10.0, 256).unwrap());
        let x = SampledFn::scalar(g.clone(), |t| (-t).exp(), None).unwrap();
        let u = SampledFn::scalar(g, |_| 0.5, None).unwrap();
        let mut c0s = Vec::new();
        for gamma in [0.1, 1.0, 10.0] {
            let r = check_a2_growth(&pb, &Tube::new(x.clone(), gamma).unwrap(), &u).unwrap();
            assert_eq!(r.verdict, Verdict::Pass);
            c0s.push(r.c0_estimate);
        }
        assert!(c0s.iter().all(|c| *c <= 2.0f64.hypot(2.0) + 0.5));
    }

    #[test]
    fn sqrt_dynamics_crossing_zero_is_a_domain_error() {
        let pb = ControlProblem::new(ProblemSpec {
            name: "sqrt".into(),
            f: |_, _: &Vector, _: &Vector| 0.0,
            f_x: |_, _: &Vector, _: &Vector| DVector::zeros(1),
            phi: |_, x: &Vector, _: &Vector| DVector::from_element(1, x[0].sqrt()),
            phi_x: |_, x: &Vector, _: &Vector| DMatrix::from_element(1, 1, 0.5 / x[0].sqrt()),
            control_set: ControlSet::real_line(),
            x0: vec![1.0],
            omega: DistributionSpec::exponential(1.0),
            nu: WeightSpec::exponential(1.0),
            p_exp: 2.0,
        })
        .unwrap();
        let g = Arc::new(Grid::default_grid(5.0, 64).unwrap());
        let x = SampledFn::scalar(g.clone(), |_| 0.5, None).unwrap();
        let u = SampledFn::scalar(g, |_| 0.0, None).unwrap();
        let r = check_a2_growth(&pb, &Tube::new(x, 1.0).unwrap(), &u);
        assert!(matches!(r, Err(Error::EvaluationDomainError { .. })));
    }

    #[test]
    fn inactive_and_forced_constraints() {
        let pb = linear_problem()
            .with_constraint(StateConstraint::new("x<=10", |_, x| x[0] - 10.0, |_, _| DVector::from_element(1, 1.0)));
        let g = Arc::new(Grid::default_grid(10.0, 128).unwrap());
        let x = SampledFn::scalar(g.clone(), |t| 3.0 * (-t).exp(), None).unwrap();
        let a = active_indices(&pb, &x, 1e-6);
        assert!(a.indices().is_empty());
        assert!(a.entries[0].active_times.is_empty());
        assert_eq!(check_condition_f(&pb, &x, 1e-6), Verdict::Pass);
        let forced = linear_problem().with_constraint(StateConstraint::new(
            "x=1",
            |_, x| x[0] - 1.0,
            |_, _| DVector::from_element(1, 1.0),
        ));
        let one = SampledFn::scalar(g, |_| 1.0, None).unwrap();
        assert_eq!(active_indices(&forced, &one, 0.0).indices(), vec![0]);
        assert_eq!(check_condition_f(&forced, &one, 1e-6), Verdict::Fail);
        let none = linear_problem();
        assert_eq!(check_condition_f(&none, &one, 1e-6), Verdict::Pass);
    }

    #[test]
    fn control_set_membership() {
        let b = ControlSet::interval(0.0, 1.0);
        assert!(b.contains(&DVector::from_element(1, 0.5), 0.0));
        assert!(!b.contains(&DVector::from_element(1, 1.1), 1e-6));
        assert!(b.interior(&DVector::from_element(1, 0.5), 1e-9));
        let h = ControlSet::nonnegative();
        assert!(h.contains(&DVector::from_element(1, 1e9), 0.0));
        assert!(!h.is_bounded());
        let f = ControlSet::FiniteSample(vec![vec![1.0], vec![2.0]]);
        assert!(f.contains(&DVector::from_element(1, 2.0), 1e-12));
        assert!(!f.contains(&DVector::from_element(1, 1.5), 1e-12));
        assert!(ControlSet::FiniteSample(vec![]).validate().is_err());
    }
}

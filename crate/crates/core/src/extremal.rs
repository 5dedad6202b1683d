//! Unconstrained maximum principle: fundamental matrices, the adjoint via its
//! representation integral, the maximum condition, transversality, the Michel
//! condition, condition (S) and the search for abnormal multipliers.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ode::{self, DEFAULT_SUBSTEPS};
use crate::problem::{CandidateProcess, ControlProblem, ControlSet, Matrix, Vector};
use crate::quad::{self, Settle};
use crate::report::Verdict;
use crate::spaces::{self, DecayMode, Grid, SampledFn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Floor below which `max(λ₀, ‖p‖_∞)` counts as the trivial multiplier.
pub const NONTRIVIAL_FLOOR: f64 = 1e-12;

/// Multipliers `(λ₀, p)`.
#[derive(Debug, Clone)]
pub struct PontryaginData {
    pub lambda0: f64,
    pub p: SampledFn,
}

impl PontryaginData {
    pub fn new(lambda0: f64, p: SampledFn) -> Result<Self> {
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(Error::Config(format!("λ₀ must be a finite nonnegative number, got {lambda0}")));
        }
        Ok(PontryaginData { lambda0, p })
    }

    /// `max(λ₀, ‖p‖_∞)`, the natural scale of H.
    pub fn scale(&self) -> f64 {
        self.lambda0.max(self.p.sup_norm())
    }

    pub fn is_nontrivial(&self) -> bool {
        self.scale() > NONTRIVIAL_FLOOR
    }

    pub fn scaled(&self, c: f64) -> Self {
        PontryaginData { lambda0: self.lambda0 * c, p: self.p.scaled(c) }
    }
}

/// Solutions of `Ẏ = φ_x Y` and `Ż = −φ_xᵀ Z` with `Y(0) = Z(0) = I`.
#[derive(Debug, Clone)]
pub struct FundamentalMatrices {
    grid: Arc<Grid>,
    pub y: Vec<Matrix>,
    pub z: Vec<Matrix>,
}

impl FundamentalMatrices {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `max_i ‖Z(t_i)ᵀ Y(t_i) − I‖_F`.
    pub fn duality_error(&self) -> f64 {
        let n = self.y[0].nrows();
        let id = DMatrix::<f64>::identity(n, n);
        self.y
            .iter()
            .zip(&self.z)
            .map(|(y, z)| (z.transpose() * y - &id).norm())
            .fold(0.0, f64::max)
    }
}

pub fn hamiltonian(pb: &ControlProblem, t: f64, x: &Vector, u: &Vector, p: &Vector, lambda0: f64) -> f64 {
    pb.hamiltonian(t, x, u, p, lambda0)
}

fn jacobian_along<'a>(pb: &'a ControlProblem, cand: &'a CandidateProcess) -> impl Fn(f64) -> Matrix + 'a {
    move |s| (pb.phi_x)(s, &cand.state_at(s), &cand.control_at(s))
}

/// RK4 integration of both variational systems along the candidate.
pub fn fundamental_matrices(pb: &ControlProblem, cand: &CandidateProcess) -> Result<FundamentalMatrices> {
    let t = cand.times();
    let id = DMatrix::<f64>::identity(pb.n, pb.n);
    let jac = jacobian_along(pb, cand);
    let y = ode::rk4_along(t, id.clone(), |s, y| jac(s) * y, |m| m.norm(), DEFAULT_SUBSTEPS)?;
    let z = ode::rk4_along(t, id, |s, z| -(jac(s).transpose() * z), |m| m.norm(), DEFAULT_SUBSTEPS)?;
    Ok(FundamentalMatrices { grid: cand.x.grid_arc().clone(), y, z })
}

/// Estimates `∫_{t_N}^∞ I(s) ds` for a geometrically decaying integrand from
/// two tail windows; errors when the two decay rates disagree by more than
/// the grid's tail tolerance or the integrand does not decay.
fn geometric_tail(grid: &Grid, vals: &[Vector]) -> Result<Vector> {
    let t = grid.nodes();
    let (a, c) = (grid.tail_start(), t.len() - 1);
    let b = (a + c) / 2;
    let (na, nb, nc) = (vals[a].norm(), vals[b].norm(), vals[c].norm());
    let dim = vals[c].len();
    if nc == 0.0 && nb == 0.0 {
        return Ok(DVector::zeros(dim));
    }
    let tol = grid.tail_tol;
    if !(na > 0.0 && nb > 0.0 && nc > 0.0) || !nc.is_finite() {
        return if nc <= 1e-3 * tol {
            Ok(DVector::zeros(dim))
        } else {
            Err(Error::TailNotSettled { tail: nc })
        };
    }
    let k1 = (na / nb).ln() / (t[b] - t[a]);
    let k2 = (nb / nc).ln() / (t[c] - t[b]);
    if !(k2 > 0.0) {
        return Err(Error::TailNotSettled { tail: f64::INFINITY });
    }
    let est = nc / k2;
    let spread = if k1 > 0.0 { (nc / k1 - est).abs() } else { f64::INFINITY };
    if spread > tol {
        return Err(Error::TailNotSettled { tail: est });
    }
    Ok(&vals[c] / k2)
}

/// `R(t_i) = ∫_{t_i}^∞ ω(s) Y(s)ᵀ f_x(s) ds`. A singular ω(0) is handled by
/// integrating ω exactly over the first cell.
fn representation_integral(pb: &ControlProblem, cand: &CandidateProcess, fm: &FundamentalMatrices) -> Result<Vec<Vector>> {
    let grid = cand.grid();
    let t = grid.nodes();
    let n_nodes = t.len();
    let base: Vec<Vector> = (0..n_nodes)
        .map(|i| fm.y[i].transpose() * (pb.f_x)(t[i], cand.x.value(i), cand.u.value(i)))
        .collect();
    let integrand: Vec<Vector> = base
        .iter()
        .enumerate()
        .map(|(i, g)| {
            if g.iter().all(|v| *v == 0.0) {
                g.clone()
            } else {
                g * pb.omega.eval(t[i])
            }
        })
        .collect();
    let singular = integrand[0].iter().any(|v| !v.is_finite());
    let start = usize::from(singular);
    if let Some(i) = integrand[start..].iter().position(|v| v.iter().any(|c| !c.is_finite())) {
        return Err(Error::EvaluationDomainError {
            t: t[i + start],
            detail: "representation integrand not finite".into(),
        });
    }
    let tail = geometric_tail(grid, &integrand)?;
    let ts = &t[start..];
    let jumps: Vec<usize> = grid.jumps().iter().filter(|&&j| j >= start).map(|&j| j - start).collect();
    let mut out = vec![DVector::zeros(pb.n); n_nodes];
    for k in 0..pb.n {
        let y: Vec<f64> = integrand[start..].iter().map(|v| v[k]).collect();
        let r = quad::cumulative_from_end(ts, &y, &jumps);
        for (i, v) in r.iter().enumerate() {
            out[i + start][k] = v + tail[k];
        }
    }
    if singular {
        let first = (&base[0] + &base[1]) * (0.5 * pb.omega.mass(t[0], t[1]));
        out[0] = &out[1] + first;
    }
    Ok(out)
}

/// `p(t) = −Z(t) ∫_t^∞ ω(s) Y(s)ᵀ f_x(s) ds` (normal case, λ₀ = 1). The result
/// carries no derivative samples, so residual checks difference it.
pub fn adjoint_via_representation(pb: &ControlProblem, cand: &CandidateProcess) -> Result<SampledFn> {
    let fm = fundamental_matrices(pb, cand)?;
    adjoint_with_matrices(pb, cand, &fm)
}

pub fn adjoint_with_matrices(pb: &ControlProblem, cand: &CandidateProcess, fm: &FundamentalMatrices) -> Result<SampledFn> {
    let r = representation_integral(pb, cand, fm)?;
    let p: Vec<Vector> = fm.z.iter().zip(&r).map(|(z, r)| -(z * r)).collect();
    SampledFn::new(cand.x.grid_arc().clone(), p, None)
}

/// `max_i ‖ṗ + φ_xᵀ p − λ₀ ω f_x‖ / max(1, ‖p‖_∞)`. Nodes where ω is infinite
/// are skipped in the normal case.
pub fn adjoint_residual(pb: &ControlProblem, cand: &CandidateProcess, pd: &PontryaginData) -> f64 {
    let dp = pd.p.derivative_or_fd();
    let t = cand.times();
    let mut worst = 0.0f64;
    for i in 0..t.len() {
        let (x, u, p) = (cand.x.value(i), cand.u.value(i), pd.p.value(i));
        let mut r = &dp[i] + (pb.phi_x)(t[i], x, u).transpose() * p;
        if pd.lambda0 != 0.0 {
            let w = pb.omega.eval(t[i]);
            if !w.is_finite() {
                continue;
            }
            r -= (pb.f_x)(t[i], x, u) * (pd.lambda0 * w);
        }
        let v = r.norm();
        if !v.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(v);
    }
    worst / pd.p.sup_norm().max(1.0)
}

/// Finite subset of U on which H is maximized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSampler {
    /// Points per bounded axis.
    pub box_points: usize,
    /// Geometric points per unbounded direction.
    pub ray_points: usize,
    pub ray_min: f64,
    /// Largest sampled distance along an unbounded direction.
    pub ray_cap: f64,
    /// Golden-section refinement around the best sample.
    pub refine: bool,
    /// Cap on the tensor-product size for m > 1.
    pub max_points: usize,
    /// Additional controls sampled at every time.
    pub extra: Vec<Vec<f64>>,
    pub exec: Exec,
}

impl Default for ControlSampler {
    fn default() -> Self {
        ControlSampler {
            box_points: 129,
            ray_points: 121,
            ray_min: 1e-6,
            ray_cap: 1e6,
            refine: true,
            max_points: 20_000,
            extra: Vec::new(),
            exec: Exec::default(),
        }
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

impl ControlSampler {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// A sampler for a coarse/fine comparison: `factor` times the default density.
    pub fn with_density(mut self, factor: f64) -> Self {
        self.box_points = (((self.box_points - 1) as f64 * factor).round() as usize).max(2) + 1;
        self.ray_points = (((self.ray_points - 1) as f64 * factor).round() as usize).max(7) + 1;
        self
    }

    fn per_axis(&self, m: usize, base: usize) -> usize {
        if m <= 1 {
            return base;
        }
        let cap = (self.max_points as f64).powf(1.0 / m as f64).floor() as usize;
        base.min(cap).max(3)
    }

    fn ray(&self, m: usize) -> Vec<f64> {
        let n = self.per_axis(m, self.ray_points).max(2);
        let (lo, hi) = (self.ray_min.ln(), self.ray_cap.ln());
        (0..n).map(|j| (lo + (hi - lo) * j as f64 / (n - 1) as f64).exp()).collect()
    }

    /// Sorted sample coordinates along axis `k`.
    pub fn axis_points(&self, set: &ControlSet, k: usize, anchor: Option<f64>) -> Vec<f64> {
        let m = set.dim();
        let (l, h) = set.bounds(k);
        let mut pts = Vec::new();
        match (l.is_finite(), h.is_finite()) {
            (true, true) => {
                let n = self.per_axis(m, self.box_points).max(2);
                pts.extend((0..n).map(|j| l + (h - l) * j as f64 / (n - 1) as f64));
            }
            (true, false) => {
                pts.push(l);
                pts.extend(self.ray(m).into_iter().map(|r| l + r));
            }
            (false, true) => {
                pts.push(h);
                pts.extend(self.ray(m).into_iter().map(|r| h - r));
            }
            (false, false) => {
                pts.push(0.0);
                for r in self.ray(m) {
                    pts.push(r);
                    pts.push(-r);
                }
            }
        }
        if let Some(a) = anchor {
            if a.is_finite() && a >= l && a <= h {
                pts.push(a);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    fn candidates(&self, pb: &ControlProblem, t: f64, x: &Vector, p: &Vector, lambda0: f64, anchor: &Vector) -> Vec<Vector> {
        let set = &pb.control_set;
        let mut out = Vec::new();
        if set.contains(anchor, 1e-12) {
            out.push(anchor.clone());
        }
        if let Some(st) = &pb.stationary {
            out.extend(st(t, x, p, lambda0).into_iter().filter(|u| set.contains(u, 0.0)));
        }
        out.extend(
            self.extra
                .iter()
                .map(|u| DVector::from_column_slice(u))
                .filter(|u| set.contains(u, 0.0)),
        );
        match set {
            ControlSet::FiniteSample(v) => out.extend(v.iter().map(|u| DVector::from_column_slice(u))),
            _ => {
                let axes: Vec<Vec<f64>> = (0..pb.m)
                    .map(|k| self.axis_points(set, k, anchor.get(k).copied()))
                    .collect();
                let mut idx = vec![0usize; pb.m];
                loop {
                    out.push(DVector::from_iterator(pb.m, (0..pb.m).map(|k| axes[k][idx[k]])));
                    let mut k = 0;
                    while k < pb.m {
                        idx[k] += 1;
                        if idx[k] < axes[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == pb.m {
                        break;
                    }
                }
            }
        }
        out
    }

    /// `max_u H(t, x, u, p, λ₀)` over the samples (plus refinement). Returns
    /// `None` when H is not finite at any sample.
    pub fn maximize(
        &self,
        pb: &ControlProblem,
        t: f64,
        x: &Vector,
        p: &Vector,
        lambda0: f64,
        anchor: &Vector,
    ) -> Result<Option<(f64, Vector)>> {
        let h = |u: &Vector| pb.hamiltonian(t, x, u, p, lambda0);
        let mut best: Option<(f64, Vector)> = None;
        for u in self.candidates(pb, t, x, p, lambda0, anchor) {
            let v = h(&u);
            if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, u));
            }
        }
        let Some((mut bv, mut bu)) = best else {
            return Ok(None);
        };
        let set = &pb.control_set;
        if matches!(set, ControlSet::FiniteSample(_)) {
            return Ok(Some((bv, bu)));
        }
        for k in 0..pb.m {
            let (l, hi) = set.bounds(k);
            let axis = self.axis_points(set, k, anchor.get(k).copied());
            if (!hi.is_finite() && bu[k] >= axis[axis.len() - 1]) || (!l.is_finite() && bu[k] <= axis[0]) {
                return Err(Error::UnboundedAboveDetected { t, radius: bu[k].abs() });
            }
            if !self.refine {
                continue;
            }
            let j = axis.partition_point(|v| *v < bu[k]);
            let a = axis[j.saturating_sub(1)];
            let b = axis[(j + 1).min(axis.len() - 1)];
            if b <= a {
                continue;
            }
            let line = |s: f64| {
                let mut u = bu.clone();
                u[k] = s;
                let v = h(&u);
                if v.is_finite() { v } else { f64::NEG_INFINITY }
            };
            let (s, v) = golden_max(&line, a, b, 80);
            if v > bv {
                bv = v;
                bu[k] = s;
            }
        }
        Ok(Some((bv, bu)))
    }
}

/// Central 5-point gradient of H in u.
fn control_gradient(pb: &ControlProblem, t: f64, x: &Vector, u: &Vector, p: &Vector, lambda0: f64) -> Vector {
    DVector::from_iterator(
        pb.m,
        (0..pb.m).map(|k| {
            let h = 1e-4 * u[k].abs().max(1.0);
            let at = |s: f64| {
                let mut v = u.clone();
                v[k] += s;
                pb.hamiltonian(t, x, &v, p, lambda0)
            };
            (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxConditionTolerances {
    /// Tolerance on the gap, relative to `max(λ₀, ‖p‖_∞)`.
    pub gap: f64,
    /// Tolerance on `‖H_u‖` at interior controls, same scale.
    pub stationarity: f64,
}

impl Default for MaxConditionTolerances {
    fn default() -> Self {
        MaxConditionTolerances { gap: 1e-8, stationarity: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxConditionReport {
    pub verdict: Verdict,
    /// Largest scaled gap over nodes with finite H.
    pub worst_gap: f64,
    pub witness_t: f64,
    pub witness_u: Vec<f64>,
    /// Largest scaled `‖H_u‖` at interior controls (None if none interior).
    pub stationarity: Option<f64>,
    /// Nodes excluded from the "almost every t" set.
    pub exceptional_times: Vec<f64>,
    pub exceptional_measure: f64,
    pub allowed_measure: f64,
    pub nonfinite_times: Vec<f64>,
    /// Scaled gap per node (NaN where H is not finite).
    #[serde(skip)]
    pub gaps: Vec<f64>,
}

struct NodeGap {
    gap: f64,
    u: Vector,
    stationarity: Option<f64>,
}

/// Checks `H(t, x_*, u_*, p, λ₀) = max_u H(t, x_*, u, p, λ₀)` at every node.
/// Nodes violating it form the exceptional set, which must have measure
/// below ten typical grid steps.
pub fn max_condition_check(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    pd: &PontryaginData,
    sampler: &ControlSampler,
    tol: &MaxConditionTolerances,
) -> Result<MaxConditionReport> {
    max_condition_with(pb, cand, &pd.p, pd.lambda0, sampler, tol, &[])
}

pub(crate) fn max_condition_with(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    p: &SampledFn,
    lambda0: f64,
    sampler: &ControlSampler,
    tol: &MaxConditionTolerances,
    skip: &[usize],
) -> Result<MaxConditionReport> {
    let grid = cand.grid();
    let t = grid.nodes();
    let scale = lambda0.max(p.sup_norm()).max(f64::MIN_POSITIVE);
    let nodes: Vec<Result<Option<NodeGap>>> = sampler.exec.map(t.len(), |i| {
        if skip.contains(&i) {
            return Ok(None);
        }
        let (x, u, pi) = (cand.x.value(i), cand.u.value(i), p.value(i));
        let h_star = pb.hamiltonian(t[i], x, u, pi, lambda0);
        if !h_star.is_finite() {
            return Ok(None);
        }
        let Some((best, bu)) = sampler.maximize(pb, t[i], x, pi, lambda0, u)? else {
            return Ok(None);
        };
        let stationarity = if pb.control_set.interior(u, 1e-9) {
            let g = control_gradient(pb, t[i], x, u, pi, lambda0).norm() / scale;
            g.is_finite().then_some(g)
        } else {
            None
        };
        Ok(Some(NodeGap { gap: (best - h_star).max(0.0) / scale, u: bu, stationarity }))
    });
    let mut report = MaxConditionReport {
        verdict: Verdict::Pass,
        worst_gap: 0.0,
        witness_t: t[0],
        witness_u: cand.u.value(0).as_slice().to_vec(),
        stationarity: None,
        exceptional_times: Vec::new(),
        exceptional_measure: 0.0,
        allowed_measure: 10.0 * grid.typical_step(),
        nonfinite_times: Vec::new(),
        gaps: Vec::with_capacity(t.len()),
    };
    for (i, r) in nodes.into_iter().enumerate() {
        match r? {
            None => {
                report.gaps.push(f64::NAN);
                if !skip.contains(&i) {
                    report.nonfinite_times.push(t[i]);
                }
                report.exceptional_times.push(t[i]);
                report.exceptional_measure += grid.node_measure(i);
            }
            Some(ng) => {
                report.gaps.push(ng.gap);
                if ng.gap > report.worst_gap {
                    report.worst_gap = ng.gap;
                    report.witness_t = t[i];
                    report.witness_u = ng.u.as_slice().to_vec();
                }
                if let Some(s) = ng.stationarity {
                    report.stationarity = Some(report.stationarity.map_or(s, |v: f64| v.max(s)));
                }
                if ng.gap > tol.gap || ng.stationarity.is_some_and(|s| s > tol.stationarity) {
                    report.exceptional_times.push(t[i]);
                    report.exceptional_measure += grid.node_measure(i);
                }
            }
        }
    }
    report.verdict = Verdict::from_bool(report.exceptional_measure < report.allowed_measure);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub name: String,
    pub verdict: Verdict,
    pub end_value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub entries: Vec<TailEntry>,
}

impl TransversalityReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::combine(self.entries.iter().map(|e| e.verdict))
    }

    pub fn get(&self, name: &str) -> Option<&TailEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// `‖p‖^e ν⁻¹` at every node, in log space.
pub(crate) fn weighted_adjoint_series(p: &SampledFn, nu: &crate::weights::WeightSpec, e: f64) -> Result<Vec<f64>> {
    p.times()
        .iter()
        .zip(p.values())
        .map(|(&t, v)| {
            let n = v.norm();
            Ok(if n == 0.0 { 0.0 } else { (e * n.ln() - nu.ln_eval(t)?).exp() })
        })
        .collect()
}

pub(crate) fn tail_entry(grid: &Grid, name: &str, series: &[f64], tol: f64, note: &str) -> TailEntry {
    let (verdict, end_value) = spaces::tail_decay(grid, series, tol);
    TailEntry { name: name.into(), verdict, end_value, note: note.into() }
}

/// Natural transversality at the grid tail: `‖p‖ → 0`, `‖p‖²ν⁻¹ → 0` (or
/// `‖p‖ν⁻¹ → 0` in the general mode) and `⟨p, y⟩ → 0` for each probe `y`.
pub fn transversality_check(
    pb: &ControlProblem,
    pd: &PontryaginData,
    probes: &[SampledFn],
    mode: DecayMode,
    tol: f64,
) -> Result<TransversalityReport> {
    transversality_of(pb, &pd.p, probes, mode, tol)
}

pub(crate) fn transversality_of(
    pb: &ControlProblem,
    p: &SampledFn,
    probes: &[SampledFn],
    mode: DecayMode,
    tol: f64,
) -> Result<TransversalityReport> {
    let grid = p.grid();
    let norms: Vec<f64> = p.values().iter().map(|v| v.norm()).collect();
    let mut entries = vec![tail_entry(grid, "p_norm", &norms, tol, "‖p(t)‖")];
    let (e, label) = match mode {
        DecayMode::P2 => (2.0, "‖p(t)‖²/ν(t)"),
        DecayMode::General => (1.0, "‖p(t)‖/ν(t)"),
    };
    let w = weighted_adjoint_series(p, &pb.nu, e)?;
    entries.push(tail_entry(grid, "p_weighted", &w, tol, label));
    for (k, y) in probes.iter().enumerate() {
        let name = format!("pairing_{k}");
        let yd = y.clone().with_fd_derivatives();
        let settle = spaces::w1p_finiteness(&yd, &pb.nu, pb.p_exp).map(|s| s.0).unwrap_or(Settle::Unsettled);
        if !settle.is_finite() {
            entries.push(TailEntry {
                name,
                verdict: Verdict::Inconclusive,
                end_value: f64::NAN,
                note: format!("probe not in the weighted Sobolev space ({settle:?})"),
            });
            continue;
        }
        let same = y.times() == p.times();
        let pairing: Vec<f64> = p
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let yv = if same { y.value(i).clone() } else { y.value_at(t) };
                p.value(i).dot(&yv).abs()
            })
            .collect();
        entries.push(tail_entry(grid, &name, &pairing, tol, "|⟨p(t), y(t)⟩|"));
    }
    Ok(TransversalityReport { entries })
}

/// Whether a positive series vanishes at infinity judged on the grid tail:
/// pass when it ends below `tol` or keeps decreasing by at least half over
/// the tail; fail when it does not decrease.
pub(crate) fn vanishes(grid: &Grid, series: &[f64], tol: f64) -> Verdict {
    let tail = &series[grid.tail_start()..];
    let (first, end) = (tail[0], *tail.last().unwrap());
    if tail.iter().any(|v| v.is_nan()) {
        return Verdict::Inconclusive;
    }
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    if end <= tol && monotone {
        Verdict::Pass
    } else if !(end < first) {
        Verdict::Fail
    } else if monotone && end <= 0.5 * first {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MichelReport {
    pub verdict: Verdict,
    pub end_value: f64,
    pub precondition: Verdict,
}

/// `|H(t, x_*, u_*, p, λ₀)| → 0` after checking `ν⁻¹ω² → 0` (or `ν⁻¹ω → 0`).
pub fn michel_check(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    pd: &PontryaginData,
    mode: DecayMode,
    tol: f64,
) -> Result<MichelReport> {
    michel_of(pb, cand, &pd.p, pd.lambda0, mode, tol)
}

pub(crate) fn michel_of(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    p: &SampledFn,
    lambda0: f64,
    mode: DecayMode,
    tol: f64,
) -> Result<MichelReport> {
    let grid = cand.grid();
    let t = grid.nodes();
    let e = match mode {
        DecayMode::P2 => 2.0,
        DecayMode::General => 1.0,
    };
    let pre: Vec<f64> = t
        .iter()
        .map(|&s| Ok((e * pb.omega.ln_eval(s) - pb.nu.ln_eval(s)?).exp()))
        .collect::<Result<_>>()?;
    let precondition = vanishes(grid, &pre, tol);
    if precondition == Verdict::Fail {
        return Err(Error::PreconditionFailed(format!(
            "ν⁻¹ω^{e} does not vanish (tail value {:e})",
            pre.last().unwrap()
        )));
    }
    let h: Vec<f64> = (0..t.len())
        .map(|i| pb.hamiltonian(t[i], cand.x.value(i), cand.u.value(i), p.value(i), lambda0).abs())
        .collect();
    let first = h.iter().position(|v| v.is_finite()).unwrap_or(0);
    let mut h = h;
    for v in h.iter_mut().take(first) {
        *v = 0.0;
    }
    let (mut verdict, end_value) = spaces::tail_decay(grid, &h, tol);
    if precondition == Verdict::Inconclusive && verdict == Verdict::Pass {
        verdict = Verdict::Inconclusive;
    }
    Ok(MichelReport { verdict, end_value, precondition })
}

/// Restart data for condition (S).
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbations {
    pub delta: f64,
    pub directions: Vec<Vector>,
    pub restart_times: Vec<f64>,
}

impl Perturbations {
    /// `±δ e_k` restarted at t ∈ {0, 1, 2, 4}.
    pub fn standard(n: usize, delta: f64) -> Self {
        let mut directions = Vec::new();
        for k in 0..n {
            for s in [1.0, -1.0] {
                let mut e = DVector::zeros(n);
                e[k] = s;
                directions.push(e);
            }
        }
        Perturbations { delta, directions, restart_times: vec![0.0, 1.0, 2.0, 4.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub verdict: Verdict,
    /// Smallest C_s that works for all sampled restarts.
    pub cs_estimate: f64,
    /// `(T, C_s(T))` per restart time.
    pub per_restart: Vec<(f64, f64)>,
    pub escape_time: Option<f64>,
    /// Partial-integral verdict for `∫ μ² ν`.
    pub mu_in_l2: Settle,
    pub mu_l2_norm_sq: f64,
}

/// Condition (S): `‖x(t; ζ_T) − x_*(t)‖ ≤ C_s ‖ζ_T − x_*(T)‖ μ(t)` for restarts
/// from perturbed states, plus `μ ∈ L₂(ν)`.
pub fn normality_check_s(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    pert: &Perturbations,
    mu: &SampledFn,
) -> Result<NormalityReport> {
    if mu.times() != cand.times() || mu.dim() != 1 {
        return Err(Error::GridMismatch("μ must be scalar on the candidate grid".into()));
    }
    let grid = cand.grid();
    let t = grid.nodes();
    let tail = grid.tail_start();
    let mut per_restart = Vec::new();
    let mut escape_time = None;
    let mut growing = false;
    for &tr in &pert.restart_times {
        let k = grid.index_at_or_before(tr);
        if k + 2 >= t.len() {
            continue;
        }
        let mut cs = 0.0f64;
        for d in &pert.directions {
            let off = d * (pert.delta / d.norm());
            let ts = &t[k..];
            let phi = &pb.phi;
            let run = ode::rk4_along(ts, cand.x.value(k) + &off, |s, x| phi(s, x, &cand.control_at(s)), |x| x.norm(), DEFAULT_SUBSTEPS);
            let xs = match run {
                Ok(xs) => xs,
                Err(Error::IntegrationBlowup { t: te }) => {
                    escape_time = Some(escape_time.map_or(te, |v: f64| v.min(te)));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let ratios: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(j, x)| (x - cand.x.value(k + j)).norm() / (pert.delta * mu.value(k + j)[0]))
                .collect();
            let body_max = ratios[..tail.saturating_sub(k).max(1)].iter().cloned().fold(0.0, f64::max);
            let tail_r = &ratios[tail.saturating_sub(k).min(ratios.len() - 1)..];
            let end = *tail_r.last().unwrap();
            if end > body_max * (1.0 + 1e-6) && end > tail_r[0] * (1.0 + 1e-6) {
                growing = true;
            }
            cs = ratios.iter().cloned().fold(cs, f64::max);
        }
        per_restart.push((t[k], cs));
    }
    let y: Vec<f64> = t
        .iter()
        .enumerate()
        .map(|(i, &s)| Ok(mu.value(i)[0].powi(2) * pb.nu.eval(s)?))
        .collect::<Result<_>>()?;
    let (mu_in_l2, mu_l2_norm_sq) = spaces::doubling_partials(grid, &y);
    let cs_estimate = per_restart.iter().map(|r| r.1).fold(0.0, f64::max);
    let verdict = if escape_time.is_some() || growing || mu_in_l2 == Settle::Diverged || !cs_estimate.is_finite() {
        Verdict::Fail
    } else if mu_in_l2 == Settle::Unsettled {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(NormalityReport { verdict, cs_estimate, per_restart, escape_time, mu_in_l2, mu_l2_norm_sq })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbnormalCertificate {
    pub lambda0: f64,
    pub p0: Vec<f64>,
    pub gap: f64,
    pub transversality: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbnormalityReport {
    pub normal_feasible: bool,
    pub normal_note: String,
    pub certificate: Option<AbnormalCertificate>,
}

/// Unit initial values for the abnormal search: ±1 (n = 1), 16 directions
/// (n = 2), or the 26 lattice directions of the cube (n = 3).
pub fn unit_directions(n: usize) -> Vec<Vector> {
    match n {
        1 => vec![DVector::from_element(1, -1.0), DVector::from_element(1, 1.0)],
        2 => (0..16)
            .map(|j| {
                let a = std::f64::consts::PI * j as f64 / 8.0;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for a in [-1.0, 0.0, 1.0] {
                for b in [-1.0, 0.0, 1.0] {
                    for c in [-1.0, 0.0, 1.0] {
                        let v = DVector::from_vec(vec![a, b, c]);
                        if v.norm() > 0.0 {
                            out.push(v.normalize());
                        }
                    }
                }
            }
            out
        }
    }
}

/// Tries the normal multiplier from the representation formula; if the
/// maximum condition or transversality fails, searches `λ₀ = 0`,
/// `p = Z(t) p(0)` over unit `p(0)`.
pub fn abnormality_probe(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    sampler: &ControlSampler,
    tol: &MaxConditionTolerances,
    tail_tol: f64,
) -> Result<AbnormalityReport> {
    if pb.n > 3 {
        return Err(Error::UnsupportedProblem("abnormality search needs n <= 3".into()));
    }
    let mode = DecayMode::P2;
    let fm = fundamental_matrices(pb, cand)?;
    let normal_note = match adjoint_with_matrices(pb, cand, &fm) {
        Err(e) => format!("normal adjoint unavailable: {e}"),
        Ok(p) => {
            let pd = PontryaginData::new(1.0, p)?;
            let mc = max_condition_check(pb, cand, &pd, sampler, tol);
            let tr = transversality_check(pb, &pd, &[], mode, tail_tol)?;
            match mc {
                Ok(r) if r.verdict.is_pass() && tr.verdict().is_pass() => {
                    return Ok(AbnormalityReport {
                        normal_feasible: true,
                        normal_note: "λ₀ = 1 multiplier satisfies the maximum condition and transversality".into(),
                        certificate: None,
                    })
                }
                Ok(r) => format!(
                    "λ₀ = 1: maximum condition {} (gap {:e}), transversality {}",
                    r.verdict,
                    r.worst_gap,
                    tr.verdict()
                ),
                Err(e) => format!("λ₀ = 1: {e}"),
            }
        }
    };
    let t = cand.times();
    for p0 in unit_directions(pb.n) {
        let vals: Vec<Vector> = fm.z.iter().map(|z| z * &p0).collect();
        let ders: Vec<Vector> = (0..t.len())
            .map(|i| -((pb.phi_x)(t[i], cand.x.value(i), cand.u.value(i)).transpose() * &vals[i]))
            .collect();
        let p = SampledFn::new(cand.x.grid_arc().clone(), vals, Some(ders))?;
        let pd = PontryaginData::new(0.0, p)?;
        let Ok(mc) = max_condition_check(pb, cand, &pd, sampler, tol) else {
            continue;
        };
        if !mc.verdict.is_pass() {
            continue;
        }
        let tr = transversality_check(pb, &pd, &[], mode, tail_tol)?;
        if tr.verdict().is_pass() {
            return Ok(AbnormalityReport {
                normal_feasible: false,
                normal_note,
                certificate: Some(AbnormalCertificate {
                    lambda0: 0.0,
                    p0: p0.as_slice().to_vec(),
                    gap: mc.worst_gap,
                    transversality: tr.verdict(),
                }),
            });
        }
    }
    Err(Error::NoMultiplierFound(normal_note))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ClosedForm, ProblemSpec};
    use crate::weights::{DistributionSpec, WeightSpec};

    fn scalar(v: f64) -> Vector {
        DVector::from_element(1, v)
    }

    fn regulator() -> (ControlProblem, CandidateProcess) {
        let pb = ControlProblem::new(ProblemSpec {
            name: "regulator".into(),
            f: |_, x: &Vector, u: &Vector| 0.5 * (x[0] * x[0] + u[0] * u[0]),
            f_x: |_, x: &Vector, _: &Vector| x.clone(),
            phi: |_, x: &Vector, u: &Vector| scalar(2.0 * x[0] + u[0]),
            phi_x: |_, _: &Vector, _: &Vector| DMatrix::from_element(1, 1, 2.0),
            control_set: ControlSet::real_line(),
            x0: vec![2.0],
            omega: DistributionSpec::exponential(2.0),
            nu: WeightSpec::exponential(3.0),
            p_exp: 2.0,
        })
        .unwrap();
        let k = 1.0 - 2f64.sqrt();
        let c = -2.0 * (1.0 + 2f64.sqrt());
        let grid = Arc::new(Grid::default_grid(40.0, 4096).unwrap());
        let cand = CandidateProcess::from_closed_form(
            grid,
            ClosedForm::new(
                move |t| scalar(2.0 * (k * t).exp()),
                move |t| scalar(2.0 * k * (k * t).exp()),
                move |t| scalar(c * (k * t).exp()),
            ),
        )
        .unwrap();
        (pb, cand)
    }

    #[test]
    fn hamiltonian_at_regulator_start() {
        let (pb, _) = regulator();
        let u = -2.0 * (1.0 + 2f64.sqrt());
        let h = hamiltonian(&pb, 0.0, &scalar(2.0), &scalar(u), &scalar(u), 1.0);
        // ½(4 + u²) = 8 + 4√2 and p(4 + u) = 4
        assert!((h - (-4.0 - 4.0 * 2f64.sqrt())).abs() < 1e-12, "{h}");
        assert_eq!(hamiltonian(&pb, 1.0, &scalar(3.0), &scalar(1.0), &scalar(0.0), 0.0), 0.0);
    }

    #[test]
    fn regulator_matrices_and_adjoint() {
        let (pb, cand) = regulator();
        let fm = fundamental_matrices(&pb, &cand).unwrap();
        assert!(fm.duality_error() <= 1e-8, "{}", fm.duality_error());
        let t = cand.times();
        let i = t.len() / 10;
        assert!((fm.y[i][(0, 0)] / (2.0 * t[i]).exp() - 1.0).abs() < 1e-9);
        let p = adjoint_with_matrices(&pb, &cand, &fm).unwrap();
        let s = 1.0 + 2f64.sqrt();
        let err = t
            .iter()
            .zip(p.values())
            .map(|(&t, v)| (v[0] + 2.0 * s * (-s * t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
        let pd = PontryaginData::new(1.0, p).unwrap();
        assert!(adjoint_residual(&pb, &cand, &pd) <= 1e-6);
        let mc = max_condition_check(&pb, &cand, &pd, &ControlSampler::default(), &Default::default()).unwrap();
        assert_eq!(mc.verdict, Verdict::Pass);
        assert!(mc.worst_gap <= 1e-8, "{}", mc.worst_gap);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (s, v) = golden_max(&|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 80);
        assert!((s - 0.3).abs() < 1e-7 && v <= 0.0);
    }

    #[test]
    fn unit_direction_counts() {
        assert_eq!(unit_directions(1).len(), 2);
        assert_eq!(unit_directions(2).len(), 16);
        assert_eq!(unit_directions(3).len(), 26);
    }
}

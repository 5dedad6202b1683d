//! Finite-horizon approximation experiments: truncated optima of catalog
//! problems, defect series between two processes and the convergence test
//! of Hypothesis (H).

use crate::catalog::Sense;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problem::{cost_integral, CandidateProcess, ControlProblem};
use crate::quad;
use crate::report::Verdict;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default horizons of a sweep.
pub const DEFAULT_HORIZONS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

/// Structures for which truncated problems are solved exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Structure {
    /// sup ∫ (1 − u)x, ẋ = u x, u ∈ [0, 1].
    Growth,
    /// min ∫ −u x, ẋ = −u x, u ∈ [0, 1].
    Decay,
    /// min ∫ e^{−ρt} ½(x² + u²), ẋ = βx + u, u ∈ ℝ.
    Regulator { beta: f64, rho: f64, x0: f64 },
}

fn structure(pb: &ControlProblem) -> Result<Structure> {
    let unit_box = pb.n == 1 && pb.m == 1 && pb.control_set.bounds(0) == (0.0, 1.0);
    match pb.name.as_str() {
        "truncation_pathology" if unit_box => Ok(Structure::Growth),
        "decay_example" if unit_box => Ok(Structure::Decay),
        "regulator" | "regulator2" | "regulator3" if pb.n == 1 => {
            let z = crate::problem::Vector::zeros(1);
            Ok(Structure::Regulator {
                beta: (pb.phi_x)(0.0, &z, &z)[(0, 0)],
                rho: -pb.omega.ln_eval(1.0),
                x0: pb.x0[0],
            })
        }
        _ => Err(Error::UnsupportedProblem(format!(
            "no truncated solver for '{}'; only the catalog growth, decay and regulator problems are supported",
            pb.name
        ))),
    }
}

/// Search settings of [`solve_truncated_switching_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingOptions {
    /// Largest number of switches, at most 3.
    pub switch_count: usize,
    /// Switching times are searched on `T·j/resolution`.
    pub resolution: usize,
    /// Golden-section polishing of each switching time after the grid search.
    pub refine: bool,
}

impl Default for SwitchingOptions {
    fn default() -> Self {
        SwitchingOptions { switch_count: 2, resolution: 96, refine: true }
    }
}

impl SwitchingOptions {
    pub fn policy_class(&self) -> String {
        format!(
            "bang-bang controls in {{0, 1}} with at most {} switches on the grid T·j/{}{}",
            self.switch_count,
            self.resolution,
            if self.refine { ", golden-section refined" } else { "" }
        )
    }
}

/// Best process found for one truncated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSolution {
    pub horizon: f64,
    /// Optimal value in the problem's natural sense.
    pub value: f64,
    pub sense: Sense,
    /// Control on the first arc.
    pub initial_control: f64,
    pub switching_times: Vec<f64>,
    pub policy_class: String,
}

/// Minimization cost of a bang-bang control over `[0, T]`, integrated exactly.
fn bang_bang_cost(s: Structure, horizon: f64, u0: f64, switches: &[f64]) -> f64 {
    let mut x = 1.0;
    let mut cost = 0.0;
    let mut t = 0.0;
    let mut u = u0;
    for &end in switches.iter().chain(std::iter::once(&horizon)) {
        let len = (end.min(horizon) - t).max(0.0);
        match (s, u > 0.5) {
            (Structure::Growth, true) => x *= len.exp(),
            (Structure::Growth, false) => cost -= x * len,
            (Structure::Decay, true) => {
                let xn = x * (-len).exp();
                cost += xn - x;
                x = xn;
            }
            _ => {}
        }
        t = t.max(end.min(horizon));
        u = 1.0 - u;
    }
    cost
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc <= fd {
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
    if fc <= fd { (c, fc) } else { (d, fd) }
}

/// Nondecreasing index tuples of length `k` with entries in `0..=m`.
fn for_each_tuple(k: usize, m: usize, f: &mut dyn FnMut(&[usize])) {
    let mut idx = vec![0usize; k];
    loop {
        f(&idx);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < m {
                idx[pos] += 1;
                let v = idx[pos];
                idx[pos + 1..k].fill(v);
                break;
            }
        }
    }
}

/// Truncated optimum over bang-bang controls with default search settings.
pub fn solve_truncated_switching(pb: &ControlProblem, horizon: f64, switch_count: usize) -> Result<TruncatedSolution> {
    solve_truncated_switching_with(pb, horizon, &SwitchingOptions { switch_count, ..Default::default() })
}

/// Brute-force search over switching-time grids for the growth and decay
/// problems. Each arc is integrated in closed form.
pub fn solve_truncated_switching_with(pb: &ControlProblem, horizon: f64, opts: &SwitchingOptions) -> Result<TruncatedSolution> {
    let s = structure(pb)?;
    if matches!(s, Structure::Regulator { .. }) {
        return Err(Error::UnsupportedProblem("the regulator has no bang-bang structure; use truncated_value".into()));
    }
    if opts.switch_count > 3 {
        return Err(Error::Config("switch_count must be at most 3".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() || opts.resolution == 0 {
        return Err(Error::Config("horizon and resolution must be positive".into()));
    }
    let m = opts.resolution;
    let mut best = (f64::INFINITY, 0.0, Vec::new());
    for u0 in [0.0, 1.0] {
        for k in 0..=opts.switch_count {
            for_each_tuple(k, m, &mut |idx| {
                let sw: Vec<f64> = idx.iter().map(|&j| horizon * j as f64 / m as f64).collect();
                let c = bang_bang_cost(s, horizon, u0, &sw);
                if c < best.0 {
                    best = (c, u0, sw);
                }
            });
        }
    }
    let (mut cost, u0, mut sw) = best;
    if opts.refine {
        let h = horizon / m as f64;
        for _ in 0..3 {
            for i in 0..sw.len() {
                let lo = if i == 0 { 0.0 } else { sw[i - 1] }.max(sw[i] - h);
                let hi = if i + 1 == sw.len() { horizon } else { sw[i + 1] }.min(sw[i] + h);
                let eval = |v: f64| {
                    let mut trial = sw.clone();
                    trial[i] = v;
                    bang_bang_cost(s, horizon, u0, &trial)
                };
                let (v, c) = golden_min(&eval, lo, hi);
                if c < cost {
                    cost = c;
                    sw[i] = v;
                }
            }
        }
    }
    // Drop switches that do not change the control.
    let mut kept: Vec<f64> = Vec::new();
    let mut u = u0;
    let mut first = u0;
    for &t in &sw {
        if t <= 0.0 {
            u = 1.0 - u;
            first = u;
            continue;
        }
        if t >= horizon {
            break;
        }
        if kept.last() == Some(&t) {
            kept.pop();
        } else {
            kept.push(t);
        }
        u = 1.0 - u;
    }
    let sense = if s == Structure::Growth { Sense::Maximize } else { Sense::Minimize };
    Ok(TruncatedSolution {
        horizon,
        value: native(sense, cost),
        sense,
        initial_control: first,
        switching_times: kept,
        policy_class: opts.policy_class(),
    })
}

fn native(sense: Sense, cost: f64) -> f64 {
    match sense {
        Sense::Minimize => cost,
        Sense::Maximize => -cost,
    }
}

/// Optimal cost of the truncated regulator from the scalar Riccati equation.
///
/// With `y = e^{−ρt/2} x` the problem becomes `ẏ = b y + v`, `b = β − ρ/2`,
/// and `P' = P² − 2bP − 1`, `P(T) = 0`, so `J_T = ½ P(0) x₀²`.
pub fn regulator_truncated_value(beta: f64, rho: f64, x0: f64, horizon: f64) -> f64 {
    let b = beta - 0.5 * rho;
    let s = (b * b + 1.0).sqrt();
    let (r1, r2) = (b + s, b - s);
    let k = (r1 / r2) * (-2.0 * s * horizon).exp();
    let p0 = (r1 - k * r2) / (1.0 - k);
    0.5 * p0 * x0 * x0
}

/// Truncated optimal value of a supported catalog problem.
pub fn truncated_value(pb: &ControlProblem, horizon: f64, opts: &SwitchingOptions) -> Result<TruncatedSolution> {
    match structure(pb)? {
        Structure::Regulator { beta, rho, x0 } => Ok(TruncatedSolution {
            horizon,
            value: regulator_truncated_value(beta, rho, x0, horizon),
            sense: Sense::Minimize,
            initial_control: f64::NAN,
            switching_times: Vec::new(),
            policy_class: "linear feedback from the Riccati equation (exact)".into(),
        }),
        _ => solve_truncated_switching_with(pb, horizon, opts),
    }
}

/// Truncated optima over a list of horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSweep {
    pub problem: String,
    pub sense: Sense,
    pub horizons: Vec<f64>,
    pub results: Vec<TruncatedSolution>,
    pub policy_class: String,
}

impl TruncationSweep {
    pub fn values(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.value).collect()
    }

    /// Writes `T, J_T, gap`. The gap is `J_T − limit` when a limit value is
    /// known and the change from the previous horizon otherwise.
    pub fn write_csv<W: Write>(&self, w: W, limit: Option<f64>) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["T", "J_T", "gap"])?;
        let v = self.values();
        for (k, (t, j)) in self.horizons.iter().zip(&v).enumerate() {
            let gap = match limit {
                Some(l) => j - l,
                None if k == 0 => f64::NAN,
                None => j - v[k - 1],
            };
            wr.write_record([crate::report::format_sig17(*t), crate::report::format_sig17(*j), crate::report::format_sig17(gap)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Solves the truncated problem for every horizon; horizons run
/// independently under `exec` and results keep horizon order.
pub fn truncation_sweep(pb: &ControlProblem, horizons: &[f64], opts: &SwitchingOptions, exec: Exec) -> Result<TruncationSweep> {
    if horizons.is_empty() || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("horizons must be nonempty and strictly increasing".into()));
    }
    let s = structure(pb)?;
    let results = exec.try_map(horizons.len(), |k| truncated_value(pb, horizons[k], opts))?;
    let policy_class = match s {
        Structure::Regulator { .. } => results[0].policy_class.clone(),
        _ => opts.policy_class(),
    };
    Ok(TruncationSweep {
        problem: pb.name.clone(),
        sense: results[0].sense,
        horizons: horizons.to_vec(),
        results,
        policy_class,
    })
}

/// `C_T = ∫_0^T ω f` along a sampled process for each horizon.
pub fn truncated_costs(pb: &ControlProblem, cand: &CandidateProcess, horizons: &[f64]) -> Result<Vec<f64>> {
    let t = cand.times();
    let t_max = *t.last().unwrap();
    let y: Vec<f64> = t
        .iter()
        .enumerate()
        .map(|(i, &s)| pb.omega.eval(s) * (pb.f)(s, cand.x.value(i), cand.u.value(i)))
        .collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::EvaluationDomainError { t: 0.0, detail: "running cost not finite".into() });
    }
    let jumps = cand.grid().jumps().to_vec();
    let c = quad::cumulative(t, &y, &jumps);
    horizons
        .iter()
        .map(|&h| {
            if !(h > 0.0) || h > t_max * (1.0 + 1e-12) {
                return Err(Error::GridMismatch(format!("horizon {h} outside (0, {t_max}]")));
            }
            let i = quad::locate(t, h.min(t_max)).min(t.len() - 2);
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(t.len() - 1);
            Ok(c[i] + quad::interval_integral(&t[lo..=hi], &y[lo..=hi], t[i], h))
        })
        .collect()
}

/// Optimality notions read off a defect series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectClassification {
    /// Δ(T) ≥ 0 on every sampled horizon of the upper half (OT).
    pub overtaking: bool,
    /// liminf Δ ≥ 0 (CU).
    pub catching_up: bool,
    /// limsup Δ ≥ 0 (SCU).
    pub sporadically_catching_up: bool,
    /// Δ converges to a nonnegative limit (GO under finite functionals).
    pub global: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSeries {
    pub horizons: Vec<f64>,
    /// Δ(T) = C_T(competitor) − C_T(candidate) in minimization form.
    pub defects: Vec<f64>,
    pub liminf: f64,
    pub limsup: f64,
    /// The upper-half oscillation is within tolerance.
    pub cauchy: bool,
    pub classification: DefectClassification,
}

/// Δ(T) for each horizon, with liminf/limsup estimated over the upper half
/// of the horizons.
pub fn defect_series(
    pb: &ControlProblem,
    cand_star: &CandidateProcess,
    competitor: &CandidateProcess,
    horizons: &[f64],
    tol: f64,
) -> Result<DefectSeries> {
    if horizons.is_empty() || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("horizons must be nonempty and strictly increasing".into()));
    }
    let a = truncated_costs(pb, cand_star, horizons)?;
    let b = truncated_costs(pb, competitor, horizons)?;
    let defects: Vec<f64> = b.iter().zip(&a).map(|(b, a)| b - a).collect();
    let tail = &defects[defects.len() / 2..];
    let liminf = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = tail.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cauchy = limsup - liminf <= tol * scale;
    let classification = DefectClassification {
        overtaking: tail.iter().all(|d| *d >= -tol * scale),
        catching_up: liminf >= -tol * scale,
        sporadically_catching_up: limsup >= -tol * scale,
        global: cauchy && *defects.last().unwrap() >= -tol * scale,
    };
    Ok(DefectSeries { horizons: horizons.to_vec(), defects, liminf, limsup, cauchy, classification })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub verdict: Verdict,
    /// J of the limit candidate in the problem's natural sense.
    pub limit_value: f64,
    /// Aitken-extrapolated limit of the truncated values.
    pub extrapolated: f64,
    /// extrapolated − limit_value.
    pub gap: f64,
    /// Truncated values diverge or move away while the limit value is finite.
    pub pathology: bool,
    /// Class of processes over which truncated optimality was certified.
    pub policy_class: String,
    pub note: String,
}

/// Aitken Δ² estimate from the last three terms, or the last term when the
/// differences are degenerate.
pub fn aitken(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 3 {
        return *v.last().unwrap_or(&f64::NAN);
    }
    let (a, b, c) = (v[n - 3], v[n - 2], v[n - 1]);
    let den = (c - b) - (b - a);
    if den.abs() <= 1e-300 || !den.is_finite() {
        return c;
    }
    let e = c - (c - b) * (c - b) / den;
    if e.is_finite() { e } else { c }
}

/// Checks whether truncated optimal values converge to J(limit_candidate).
pub fn hypothesis_h_check(
    pb: &ControlProblem,
    sweep: &TruncationSweep,
    limit_candidate: &CandidateProcess,
    tol: f64,
) -> HypothesisReport {
    let (settle, cost) = cost_integral(pb, limit_candidate);
    let limit_value = native(sweep.sense, cost);
    let v = sweep.values();
    let n = v.len();
    let extrapolated = aitken(&v);
    let gap = extrapolated - limit_value;
    let scale = limit_value.abs().max(1.0);
    let last_step = if n >= 2 { (v[n - 1] - v[n - 2]).abs() } else { f64::NAN };
    let prev_step = if n >= 3 { (v[n - 2] - v[n - 3]).abs() } else { f64::NAN };
    let settled = n >= 2 && (last_step <= tol * scale || (n >= 3 && last_step < 0.5 * prev_step));
    let diverging = !v[n - 1].is_finite()
        || (n >= 3 && last_step >= prev_step && last_step > tol * scale)
        || (n >= 2 && (v[n - 1] - limit_value).abs() > (v[n - 2] - limit_value).abs() && last_step > tol * scale);
    let base = HypothesisReport {
        verdict: Verdict::Inconclusive,
        limit_value,
        extrapolated,
        gap,
        pathology: false,
        policy_class: sweep.policy_class.clone(),
        note: String::new(),
    };
    if !settle.is_finite() {
        return HypothesisReport { note: format!("J of the limit candidate is not finite ({settle:?})"), ..base };
    }
    if diverging {
        return HypothesisReport {
            verdict: Verdict::Fail,
            pathology: true,
            note: format!(
                "truncated optimal values move away from the finite limit value {limit_value:e} (last {:e})",
                v[n - 1]
            ),
            ..base
        };
    }
    if settled {
        let ok = gap.abs() <= tol * scale;
        return HypothesisReport {
            verdict: Verdict::from_bool(ok),
            note: if ok {
                "truncated optimal values converge to the limit value".into()
            } else {
                "truncated optimal values settle at a different value".into()
            },
            ..base
        };
    }
    HypothesisReport { note: "the sweep shows no settling".into(), ..base }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn pb(name: &str) -> ControlProblem {
        catalog::get(name, &Default::default()).unwrap().problem
    }

    #[test]
    fn pathology_values() {
        let p = pb("truncation_pathology");
        let s = solve_truncated_switching(&p, 3.0, 2).unwrap();
        assert!((s.value - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
        assert_eq!(s.initial_control, 1.0);
        assert!((s.switching_times[0] - 2.0).abs() < 1e-6, "{:?}", s.switching_times);
        let s = solve_truncated_switching(&p, 1.5, 1).unwrap();
        assert!((s.value - 0.5f64.exp()).abs() < 1e-9);
        // T ≤ 1: harvesting from the start
        let s = solve_truncated_switching(&p, 0.8, 1).unwrap();
        assert!((s.value - 0.8).abs() < 1e-12);
        assert_eq!(s.initial_control, 0.0);
    }

    #[test]
    fn decay_value() {
        let p = pb("decay_example");
        let s = solve_truncated_switching(&p, 2.0, 1).unwrap();
        assert!((s.value - ((-2f64).exp() - 1.0)).abs() < 1e-12);
        assert!(s.switching_times.is_empty());
    }

    #[test]
    fn unsupported_structure() {
        assert!(matches!(solve_truncated_switching(&pb("fishing"), 2.0, 1), Err(Error::UnsupportedProblem(_))));
        assert!(solve_truncated_switching(&pb("truncation_pathology"), 2.0, 4).is_err());
    }

    #[test]
    fn riccati_limit() {
        let j = regulator_truncated_value(2.0, 2.0, 2.0, 60.0);
        assert!((j - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(regulator_truncated_value(2.0, 2.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn aitken_geometric() {
        let v: Vec<f64> = (0..5).map(|k| 3.0 - 0.5f64.powi(k)).collect();
        assert!((aitken(&v) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tuples_enumerate_multisets() {
        let mut n = 0;
        for_each_tuple(2, 3, &mut |_| n += 1);
        assert_eq!(n, 10);
    }
}

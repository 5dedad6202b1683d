//! Arrow-type sufficient conditions on a tube around the candidate.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::extremal::ControlSampler;
use crate::problem::{CandidateProcess, ControlProblem, Tube, Vector};
use crate::report::Verdict;
use crate::spaces::SampledFn;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcavityMode {
    MidpointPairs,
    FiniteDifferenceHessian,
}

#[derive(Debug, Clone)]
pub struct SufficiencyConfig {
    /// Seeded random tube points per node (at least 3).
    pub x_samples: usize,
    pub mode: ConcavityMode,
    pub strict_lambda: Option<SampledFn>,
    pub gamma: f64,
    pub seed: u64,
    /// Tolerance on ℋ values normalized by `max(1, |ℋ|)`.
    pub tol: f64,
    /// Upper bound on the number of time nodes visited (evenly strided).
    pub max_nodes: usize,
    pub sampler: ControlSampler,
    pub exec: Exec,
}

impl Default for SufficiencyConfig {
    fn default() -> Self {
        SufficiencyConfig {
            x_samples: 8,
            mode: ConcavityMode::MidpointPairs,
            strict_lambda: None,
            gamma: 0.5,
            seed: 0,
            tol: 1e-8,
            max_nodes: 512,
            sampler: ControlSampler::default(),
            exec: Exec::default(),
        }
    }
}

impl SufficiencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x_samples < 3 {
            return Err(Error::Config("x_samples must be at least 3".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config("tube radius must be positive".into()));
        }
        if let Some(l) = &self.strict_lambda {
            if l.values().iter().any(|v| !(v[0] > 0.0)) {
                return Err(Error::Config("strict λ(t) must be positive".into()));
            }
        }
        Ok(())
    }

    fn node_indices(&self, n: usize) -> Vec<usize> {
        let stride = n.div_ceil(self.max_nodes.max(1)).max(1);
        let mut v: Vec<usize> = (0..n).step_by(stride).collect();
        if *v.last().unwrap() != n - 1 {
            v.push(n - 1);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    pub verdict: Verdict,
    /// Largest normalized violation (≤ 0 means satisfied everywhere).
    pub worst_violation: f64,
    pub witness_t: f64,
    pub witness_x: Vec<f64>,
    pub samples: usize,
    pub note: String,
}

/// `ℋ(t, x, p) = sup_u H(t, x, u, p, 1)` over the sampler, seeded with `anchor`.
pub fn hamiltonian_sup_near(
    pb: &ControlProblem,
    t: f64,
    x: &Vector,
    p: &Vector,
    sampler: &ControlSampler,
    anchor: &Vector,
) -> Result<f64> {
    match sampler.maximize(pb, t, x, p, 1.0, anchor)? {
        Some((v, _)) => Ok(v),
        None => Err(Error::EvaluationDomainError { t, detail: "H not finite on any sampled control".into() }),
    }
}

pub fn hamiltonian_sup(pb: &ControlProblem, t: f64, x: &Vector, p: &Vector, sampler: &ControlSampler) -> Result<f64> {
    hamiltonian_sup_near(pb, t, x, p, sampler, &DVector::from_element(pb.m, f64::NAN))
}

/// Tube points around `center`: 2n axis points, n(n−1) diagonal points and
/// `random` seeded points in the ball, all at radius ≤ γ.
pub fn tube_points(center: &Vector, gamma: f64, random: usize, seed: u64) -> Vec<Vector> {
    let n = center.len();
    let mut out = Vec::with_capacity(2 * n + n * n + random);
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut x = center.clone();
            x[k] += s * gamma;
            out.push(x);
        }
    }
    let d = gamma / 2f64.sqrt();
    for k in 0..n {
        for l in k + 1..n {
            for s in [1.0, -1.0] {
                let mut x = center.clone();
                x[k] += d;
                x[l] += s * d;
                out.push(x);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < 2 * n + n * (n - 1) + random {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
        if v.norm() <= 1.0 {
            out.push(center + v * gamma);
        }
    }
    out
}

fn node_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct NodeWorst {
    violation: f64,
    x: Vector,
    samples: usize,
}

fn fold_nodes(times: &[f64], idx: &[usize], nodes: Vec<Result<NodeWorst>>, tol: f64, note: &str) -> Result<SufficiencyReport> {
    let mut rep = SufficiencyReport {
        verdict: Verdict::Pass,
        worst_violation: f64::NEG_INFINITY,
        witness_t: times[idx[0]],
        witness_x: Vec::new(),
        samples: 0,
        note: note.into(),
    };
    for (k, r) in nodes.into_iter().enumerate() {
        let w = r?;
        rep.samples += w.samples;
        if w.violation > rep.worst_violation {
            rep.worst_violation = w.violation;
            rep.witness_t = times[idx[k]];
            rep.witness_x = w.x.as_slice().to_vec();
        }
    }
    rep.verdict = Verdict::from_bool(rep.worst_violation <= tol);
    Ok(rep)
}

/// Concavity of `x ↦ ℋ(t, x, p(t))` on the tube around `x_*`.
pub fn concavity_check(pb: &ControlProblem, cand: &CandidateProcess, p: &SampledFn, cfg: &SufficiencyConfig) -> Result<SufficiencyReport> {
    cfg.validate()?;
    let t = cand.times();
    let idx = cfg.node_indices(t.len());
    let nodes = cfg.exec.map(idx.len(), |k| {
        let i = idx[k];
        let (xs, us, pi) = (cand.x.value(i), cand.u.value(i), p.value(i));
        let hs = |x: &Vector| hamiltonian_sup_near(pb, t[i], x, pi, &cfg.sampler, us);
        let pts = tube_points(xs, cfg.gamma, cfg.x_samples, node_seed(cfg.seed, i));
        let mut worst = NodeWorst { violation: f64::NEG_INFINITY, x: xs.clone(), samples: 0 };
        match cfg.mode {
            ConcavityMode::MidpointPairs => {
                let h0 = hs(xs)?;
                let mut pairs: Vec<(Vector, Vector)> = Vec::new();
                let n_det = pts.len() - cfg.x_samples;
                for a in &pts[..n_det] {
                    pairs.push((a.clone(), xs * 2.0 - a));
                }
                let rnd = &pts[n_det..];
                for j in 0..rnd.len() {
                    pairs.push((rnd[j].clone(), rnd[(j + 1) % rnd.len()].clone()));
                    pairs.push((rnd[j].clone(), xs * 2.0 - &rnd[j]));
                }
                for (a, b) in pairs {
                    let mid = (&a + &b) * 0.5;
                    let hm = if (&mid - xs).norm() == 0.0 { h0 } else { hs(&mid)? };
                    let (ha, hb) = (hs(&a)?, hs(&b)?);
                    let scale = hm.abs().max(ha.abs()).max(hb.abs()).max(1.0);
                    let v = (0.5 * (ha + hb) - hm) / scale;
                    worst.samples += 1;
                    if v > worst.violation {
                        worst.violation = v;
                        worst.x = mid;
                    }
                }
            }
            ConcavityMode::FiniteDifferenceHessian => {
                let mut centers = vec![xs.clone()];
                centers.extend(pts.iter().map(|q| xs + (q - xs) * 0.5));
                let n = pb.n;
                for c in centers {
                    let h = (1e-2 * c.norm().max(1.0)).min(0.5 * cfg.gamma);
                    let at = |dk: usize, sk: f64, dl: usize, sl: f64| {
                        let mut x = c.clone();
                        x[dk] += sk * h;
                        x[dl] += sl * h;
                        hs(&x)
                    };
                    let h0 = hs(&c)?;
                    let mut hess = DMatrix::<f64>::zeros(n, n);
                    for k in 0..n {
                        let mut e = c.clone();
                        e[k] += h;
                        let hp = hs(&e)?;
                        e[k] -= 2.0 * h;
                        let hm = hs(&e)?;
                        hess[(k, k)] = (hp - 2.0 * h0 + hm) / (h * h);
                        for l in 0..k {
                            let v = (at(k, 1.0, l, 1.0)? - at(k, 1.0, l, -1.0)? - at(k, -1.0, l, 1.0)? + at(k, -1.0, l, -1.0)?)
                                / (4.0 * h * h);
                            hess[(k, l)] = v;
                            hess[(l, k)] = v;
                        }
                    }
                    let lmax = hess.symmetric_eigenvalues().max();
                    let v = lmax / h0.abs().max(1.0);
                    worst.samples += 1;
                    if v > worst.violation {
                        worst.violation = v;
                        worst.x = c;
                    }
                }
            }
        }
        Ok(worst)
    });
    let note = match cfg.mode {
        ConcavityMode::MidpointPairs => "midpoint concavity of ℋ(t, ·, p(t)) on the tube",
        ConcavityMode::FiniteDifferenceHessian => "largest eigenvalue of the finite-difference ℋ_xx",
    };
    fold_nodes(t, &idx, nodes, cfg.tol, note)
}

/// `ℋ(t, x_*, p) − ℋ(t, x, p) − ⟨ṗ, x − x_*⟩ ≥ λ(t) ‖x − x_*‖²` on the tube.
/// Pass `ṗ` for the unconstrained case, `q̇` for the state-constrained one.
pub fn strict_growth_check(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    p: &SampledFn,
    p_dot: &[Vector],
    lambda: &SampledFn,
    cfg: &SufficiencyConfig,
) -> Result<SufficiencyReport> {
    cfg.validate()?;
    if lambda.times() != cand.times() || p_dot.len() != cand.times().len() {
        return Err(Error::GridMismatch("λ and ṗ must live on the candidate grid".into()));
    }
    if lambda.values().iter().any(|v| !(v[0] > 0.0)) {
        return Err(Error::Config("λ(t) must be positive".into()));
    }
    let t = cand.times();
    let idx = cfg.node_indices(t.len());
    let nodes = cfg.exec.map(idx.len(), |k| {
        let i = idx[k];
        let (xs, us, pi) = (cand.x.value(i), cand.u.value(i), p.value(i));
        let hs = |x: &Vector| hamiltonian_sup_near(pb, t[i], x, pi, &cfg.sampler, us);
        let h0 = hs(xs)?;
        let mut pts = vec![xs.clone()];
        pts.extend(tube_points(xs, cfg.gamma, cfg.x_samples, node_seed(cfg.seed, i)));
        let mut worst = NodeWorst { violation: f64::NEG_INFINITY, x: xs.clone(), samples: 0 };
        for x in pts {
            let hx = hs(&x)?;
            let d = &x - xs;
            let lhs = h0 - hx - p_dot[i].dot(&d);
            let rhs = lambda.value(i)[0] * d.norm_squared();
            let v = (rhs - lhs) / h0.abs().max(hx.abs()).max(1.0);
            worst.samples += 1;
            if v > worst.violation {
                worst.violation = v;
                worst.x = x;
            }
        }
        Ok(worst)
    });
    fold_nodes(t, &idx, nodes, cfg.tol, "strict quadratic growth of ℋ along the tube")
}

/// Midpoint convexity of every `g_j(t, ·)` on the tube.
pub fn constraint_convexity_check(pb: &ControlProblem, tube: &Tube, cfg: &SufficiencyConfig) -> Result<SufficiencyReport> {
    cfg.validate()?;
    if pb.constraints.is_empty() {
        return Err(Error::PreconditionFailed("problem has no state constraints".into()));
    }
    let t = tube.reference.times();
    let idx = cfg.node_indices(t.len());
    let nodes = cfg.exec.map(idx.len(), |k| {
        let i = idx[k];
        let xs = tube.reference.value(i);
        let pts = tube_points(xs, tube.gamma, cfg.x_samples, node_seed(cfg.seed, i));
        let mut worst = NodeWorst { violation: f64::NEG_INFINITY, x: xs.clone(), samples: 0 };
        for c in &pb.constraints {
            let g = |x: &Vector| (c.g)(t[i], x);
            let mut pairs: Vec<(Vector, Vector)> = pts.iter().map(|a| (a.clone(), xs * 2.0 - a)).collect();
            for j in 0..pts.len() {
                pairs.push((pts[j].clone(), pts[(j + 1) % pts.len()].clone()));
            }
            for (a, b) in pairs {
                let mid = (&a + &b) * 0.5;
                let (ga, gb, gm) = (g(&a), g(&b), g(&mid));
                let v = (gm - 0.5 * (ga + gb)) / ga.abs().max(gb.abs()).max(1.0);
                if !v.is_finite() {
                    return Err(Error::EvaluationDomainError { t: t[i], detail: format!("{} not finite", c.name) });
                }
                worst.samples += 1;
                if v > worst.violation {
                    worst.violation = v;
                    worst.x = mid;
                }
            }
        }
        Ok(worst)
    });
    fold_nodes(t, &idx, nodes, cfg.tol, "midpoint convexity of the state constraints")
}

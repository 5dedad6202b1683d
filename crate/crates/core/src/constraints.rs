//! State-constrained maximum principle with measure multipliers stored as a
//! density plus finitely many atoms.

use crate::error::{Error, Result};
use crate::extremal::{self, ControlSampler, MaxConditionReport, MaxConditionTolerances, TransversalityReport};
use crate::problem::{CandidateProcess, ControlProblem, Vector};
use crate::quad;
use crate::report::Verdict;
use crate::spaces::{DecayMode, Grid, SampledFn};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub tau: f64,
    pub beta: f64,
}

/// `μ_j = λ_j(t) dt + Σ_k β_jk δ_{τ_jk}`.
#[derive(Debug, Clone)]
pub struct ConstraintMeasure {
    pub constraint_index: usize,
    pub density: SampledFn,
    pub atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct DensityRow {
    t: f64,
    lambda: f64,
}

impl ConstraintMeasure {
    /// Validates nonnegativity, positive atom weights and atom spacing of at
    /// least `min_gap`.
    pub fn new(constraint_index: usize, density: SampledFn, atoms: Vec<Atom>, min_gap: f64) -> Result<Self> {
        if density.dim() != 1 {
            return Err(Error::InvalidSampledFn("a measure density is scalar".into()));
        }
        if let Some(i) = density.values().iter().position(|v| !(v[0] >= 0.0)) {
            return Err(Error::NonPositiveValue { t: density.times()[i], value: density.value(i)[0] });
        }
        let t_max = density.grid().t_max();
        for (k, a) in atoms.iter().enumerate() {
            if !(a.beta > 0.0) || !(a.tau >= 0.0 && a.tau < t_max) {
                return Err(Error::Config(format!("atom {k} needs β > 0 and τ in [0, T_max)")));
            }
            if k > 0 && a.tau - atoms[k - 1].tau < min_gap {
                return Err(Error::Config(format!("atoms {} and {k} closer than {min_gap}", k - 1)));
            }
        }
        Ok(ConstraintMeasure { constraint_index, density, atoms })
    }

    pub fn zero(constraint_index: usize, grid: Arc<Grid>) -> Self {
        ConstraintMeasure {
            constraint_index,
            density: SampledFn::constant(grid, DVector::zeros(1)),
            atoms: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.values().iter().all(|v| v[0] == 0.0)
    }

    pub fn density_mass(&self) -> f64 {
        let y = self.density.component(0);
        let g = self.density.grid();
        *quad::cumulative(g.nodes(), &y, g.jumps()).last().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.density_mass() + self.atoms.iter().map(|a| a.beta).sum::<f64>()
    }

    /// Writes the density as `t,lambda` and the atoms as `tau,beta`.
    pub fn write_csv<W1: Write, W2: Write>(&self, density: W1, atoms: W2) -> Result<()> {
        let mut w = csv::Writer::from_writer(density);
        for (t, v) in self.density.times().iter().zip(self.density.values()) {
            w.serialize(DensityRow { t: *t, lambda: v[0] })?;
        }
        w.flush()?;
        // Header written by hand so that an empty atom list still has one.
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(atoms);
        w.write_record(["tau", "beta"])?;
        for a in &self.atoms {
            w.serialize(a)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R1: Read, R2: Read>(
        constraint_index: usize,
        density: R1,
        atoms: R2,
        tail_tol: f64,
        min_gap: f64,
    ) -> Result<Self> {
        let rows: Vec<DensityRow> = csv::Reader::from_reader(density).deserialize().collect::<std::result::Result<_, _>>()?;
        let grid = Arc::new(Grid::new(rows.iter().map(|r| r.t).collect(), tail_tol)?);
        let vals = rows.iter().map(|r| DVector::from_element(1, r.lambda)).collect();
        let dens = SampledFn::new(grid, vals, None)?;
        let atoms: Vec<Atom> = csv::Reader::from_reader(atoms).deserialize().collect::<std::result::Result<_, _>>()?;
        ConstraintMeasure::new(constraint_index, dens, atoms, min_gap)
    }
}

/// A jump `p(τ+) − p(τ)` of the left-continuous adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub tau: f64,
    pub size: Vec<f64>,
}

/// `(λ₀, p, μ_1, …, μ_k)` with `p = smooth part + Σ_{τ < t} jumps`.
#[derive(Debug, Clone)]
pub struct ConstrainedMultipliers {
    pub lambda0: f64,
    pub smooth: SampledFn,
    pub jumps: Vec<Jump>,
    pub measures: Vec<ConstraintMeasure>,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// `Σ_j β ν(τ) g_jx(τ, x(τ))` for every distinct atom time.
fn atom_jumps(pb: &ControlProblem, x: &SampledFn, measures: &[ConstraintMeasure]) -> Result<Vec<Jump>> {
    let mut out: Vec<Jump> = Vec::new();
    for m in measures {
        let c = pb
            .constraints
            .get(m.constraint_index)
            .ok_or_else(|| Error::Config(format!("no constraint {}", m.constraint_index)))?;
        for a in &m.atoms {
            let xs = x.value_at(a.tau);
            let s = (c.g_x)(a.tau, &xs) * (a.beta * pb.nu.eval(a.tau)?);
            match out.iter_mut().find(|j| same_time(j.tau, a.tau)) {
                Some(j) => j.size.iter_mut().zip(s.iter()).for_each(|(v, d)| *v += d),
                None => out.push(Jump { tau: a.tau, size: s.as_slice().to_vec() }),
            }
        }
    }
    out.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap());
    Ok(out)
}

impl ConstrainedMultipliers {
    pub fn new(lambda0: f64, smooth: SampledFn, jumps: Vec<Jump>, measures: Vec<ConstraintMeasure>) -> Result<Self> {
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(Error::Config("λ₀ must be finite and nonnegative".into()));
        }
        for j in &jumps {
            let hit = measures.iter().any(|m| m.atoms.iter().any(|a| same_time(a.tau, j.tau)));
            if !hit || j.size.len() != smooth.dim() {
                return Err(Error::Config(format!("jump at {} has no matching atom", j.tau)));
            }
        }
        Ok(ConstrainedMultipliers { lambda0, smooth, jumps, measures })
    }

    /// Builds the jump list from the atoms: `p(τ+) − p(τ) = Σ_j β ν(τ) g_jx`.
    pub fn from_smooth(
        pb: &ControlProblem,
        cand: &CandidateProcess,
        lambda0: f64,
        smooth: SampledFn,
        measures: Vec<ConstraintMeasure>,
    ) -> Result<Self> {
        let jumps = atom_jumps(pb, &cand.x, &measures)?;
        ConstrainedMultipliers::new(lambda0, smooth, jumps, measures)
    }

    /// Left-continuous value: jumps at τ count only for t > τ.
    pub fn p_at(&self, t: f64) -> Vector {
        let mut v = self.smooth.value_at(t);
        for j in self.jumps.iter().filter(|j| j.tau < t) {
            v += DVector::from_column_slice(&j.size);
        }
        v
    }

    /// p materialized at the grid nodes.
    pub fn p(&self) -> SampledFn {
        let vals = self
            .smooth
            .times()
            .iter()
            .zip(self.smooth.values())
            .map(|(&t, s)| {
                let mut v = s.clone();
                for j in self.jumps.iter().filter(|j| j.tau < t && !same_time(j.tau, t)) {
                    v += DVector::from_column_slice(&j.size);
                }
                v
            })
            .collect();
        SampledFn::new(self.smooth.grid_arc().clone(), vals, None).expect("same grid and dimension")
    }

    /// Total variation of p on [0, T_max].
    pub fn total_variation(&self) -> f64 {
        let s: f64 = self.smooth.values().windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
        s + self.jumps.iter().map(|j| DVector::from_column_slice(&j.size).norm()).sum::<f64>()
    }

    pub fn is_nontrivial(&self) -> bool {
        self.lambda0.max(self.p().sup_norm()).max(self.measures.iter().map(|m| m.total_mass()).fold(0.0, f64::max))
            > extremal::NONTRIVIAL_FLOOR
    }

    /// Grid indices of nodes sitting at an atom time or its twin.
    pub fn jump_nodes(&self) -> Vec<usize> {
        let t = self.smooth.times();
        let h = self.smooth.grid().typical_step();
        (0..t.len())
            .filter(|&i| {
                self.measures
                    .iter()
                    .flat_map(|m| &m.atoms)
                    .any(|a| t[i] >= a.tau - 1e-12 && t[i] - a.tau <= 1e-6 * h.max(1e-300) + 1e-12 * a.tau.max(1.0))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub verdict: Verdict,
    pub stray_mass: f64,
}

/// Mass of `m` on `{t : g_j(t, x(t)) < −tol}`; pass iff at most `mass_tol`.
pub fn support_check(pb: &ControlProblem, x: &SampledFn, m: &ConstraintMeasure, tol: f64, mass_tol: f64) -> Result<SupportReport> {
    let c = pb
        .constraints
        .get(m.constraint_index)
        .ok_or_else(|| Error::Config(format!("no constraint {}", m.constraint_index)))?;
    if m.density.times() != x.times() {
        return Err(Error::GridMismatch("density and state must share the grid".into()));
    }
    let t = x.times();
    let g: Vec<f64> = t.iter().zip(x.values()).map(|(&s, v)| (c.g)(s, v) + tol).collect();
    let lam = m.density.component(0);
    let mut stray = 0.0;
    for i in 0..t.len() - 1 {
        let (g0, g1) = (g[i], g[i + 1]);
        let h = t[i + 1] - t[i];
        // Portion [a, b] ⊂ [0, 1] of the cell where the shifted g is negative.
        let (a, b) = match (g0 < 0.0, g1 < 0.0) {
            (true, true) => (0.0, 1.0),
            (false, false) => continue,
            (true, false) => (0.0, g0 / (g0 - g1)),
            (false, true) => (g0 / (g0 - g1), 1.0),
        };
        let la = lam[i] + a * (lam[i + 1] - lam[i]);
        let lb = lam[i] + b * (lam[i + 1] - lam[i]);
        stray += 0.5 * (la + lb) * (b - a) * h;
    }
    for a in &m.atoms {
        if (c.g)(a.tau, &x.value_at(a.tau)) < -tol {
            stray += a.beta;
        }
    }
    Ok(SupportReport { verdict: Verdict::from_bool(stray <= mass_tol), stray_mass: stray })
}

/// `H_x(t_i) − Σ_j ν λ_j g_jx` at the nodes, with the materialized p.
fn smooth_integrand(pb: &ControlProblem, cand: &CandidateProcess, cm: &ConstrainedMultipliers, p: &SampledFn) -> Result<Vec<Vector>> {
    let t = cand.times();
    (0..t.len())
        .map(|i| {
            let (x, u) = (cand.x.value(i), cand.u.value(i));
            let mut v = pb.hamiltonian_x(t[i], x, u, p.value(i), cm.lambda0);
            for m in &cm.measures {
                let lam = m.density.value(i)[0];
                if lam != 0.0 {
                    let c = &pb.constraints[m.constraint_index];
                    v -= (c.g_x)(t[i], x) * (lam * pb.nu.eval(t[i])?);
                }
            }
            Ok(v)
        })
        .collect()
}

fn check_measure_grids(cand: &CandidateProcess, cm: &ConstrainedMultipliers) -> Result<()> {
    if cm.smooth.times() != cand.times() || cm.measures.iter().any(|m| m.density.times() != cand.times()) {
        return Err(Error::GridMismatch("multipliers and candidate must share the grid".into()));
    }
    Ok(())
}

/// `max_i ‖p(t_i) − ∫_{t_i}^∞ H_x + Σ_j ∫_{[t_i,∞)} ν g_jx dμ_j‖`.
pub fn integral_adjoint_residual(pb: &ControlProblem, cand: &CandidateProcess, cm: &ConstrainedMultipliers) -> Result<f64> {
    check_measure_grids(cand, cm)?;
    let p = cm.p();
    let grid = cand.grid();
    let t = grid.nodes();
    let vals = smooth_integrand(pb, cand, cm, &p)?;
    let start = vals.iter().rposition(|v| v.iter().any(|c| !c.is_finite())).map_or(0, |i| i + 1);
    if start + 3 > t.len() {
        return Err(Error::EvaluationDomainError { t: t[t.len() - 1], detail: "H_x not finite on the grid".into() });
    }
    let tail = tail_of(grid, &vals)?;
    let jumps: Vec<usize> = grid.jumps().iter().filter(|&&j| j >= start).map(|&j| j - start).collect();
    let atoms = atom_jumps(pb, &cand.x, &cm.measures)?;
    let mut worst = 0.0f64;
    let mut rhs = vec![DVector::zeros(pb.n); t.len()];
    for k in 0..pb.n {
        let y: Vec<f64> = vals[start..].iter().map(|v| v[k]).collect();
        let r = quad::cumulative_from_end(&t[start..], &y, &jumps);
        for (i, v) in r.iter().enumerate() {
            rhs[i + start][k] = v + tail[k];
        }
    }
    for i in start..t.len() {
        let mut r = rhs[i].clone();
        for j in atoms.iter().filter(|j| j.tau >= t[i] || same_time(j.tau, t[i])) {
            r -= DVector::from_column_slice(&j.size);
        }
        worst = worst.max((p.value(i) - r).norm());
    }
    Ok(worst)
}

fn tail_of(grid: &Grid, vals: &[Vector]) -> Result<Vector> {
    // The same geometric tail rule as the unconstrained representation.
    let t = grid.nodes();
    let (a, c) = (grid.tail_start(), t.len() - 1);
    let b = (a + c) / 2;
    let (na, nb, nc) = (vals[a].norm(), vals[b].norm(), vals[c].norm());
    if nc <= 1e-3 * grid.tail_tol {
        return Ok(DVector::zeros(vals[c].len()));
    }
    let k1 = (na / nb).ln() / (t[b] - t[a]);
    let k2 = (nb / nc).ln() / (t[c] - t[b]);
    if !(k2 > 0.0 && k1 > 0.0) || (nc / k1 - nc / k2).abs() > grid.tail_tol {
        return Err(Error::TailNotSettled { tail: nc / k2.max(0.0) });
    }
    Ok(&vals[c] / k2)
}

/// Transversality for the bounded-variation adjoint.
pub fn constrained_transversality(
    pb: &ControlProblem,
    cm: &ConstrainedMultipliers,
    mode: DecayMode,
    tol: f64,
) -> Result<TransversalityReport> {
    extremal::transversality_of(pb, &cm.p(), &[], mode, tol)
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub p0: Vector,
    pub q: SampledFn,
    pub r: SampledFn,
    /// `max_i ‖p(t_i) − p(0) − q(t_i) − r(t_i)‖`.
    pub residual: f64,
}

impl Decomposition {
    /// `p(0) + q + r` at the nodes.
    pub fn rebuild(&self) -> SampledFn {
        let vals = self.q.values().iter().zip(self.r.values()).map(|(q, r)| &self.p0 + q + r).collect();
        SampledFn::new(self.q.grid_arc().clone(), vals, None).expect("same grid")
    }
}

/// `p = p(0) + q + r` with `r(t) = Σ_{τ<t} β ν(τ) g_x` and
/// `q(t) = −∫_0^t (H_x − Σ_j λ_j ν g_jx) ds`.
pub fn decompose_adjoint(pb: &ControlProblem, cand: &CandidateProcess, cm: &ConstrainedMultipliers) -> Result<Decomposition> {
    check_measure_grids(cand, cm)?;
    let p = cm.p();
    let grid = cand.grid();
    let t = grid.nodes();
    let vals = smooth_integrand(pb, cand, cm, &p)?;
    if vals.iter().skip(1).any(|v| v.iter().any(|c| !c.is_finite())) {
        return Err(Error::EvaluationDomainError { t: 0.0, detail: "H_x not finite".into() });
    }
    let singular = vals[0].iter().any(|c| !c.is_finite());
    let mut q = vec![DVector::zeros(pb.n); t.len()];
    for k in 0..pb.n {
        let mut y: Vec<f64> = vals.iter().map(|v| v[k]).collect();
        if singular {
            y[0] = y[1];
        }
        let c = quad::cumulative(t, &y, grid.jumps());
        for (i, v) in c.iter().enumerate() {
            q[i][k] = -v;
        }
    }
    let atoms = atom_jumps(pb, &cand.x, &cm.measures)?;
    let r: Vec<Vector> = t
        .iter()
        .map(|&s| {
            let mut v = DVector::zeros(pb.n);
            for j in atoms.iter().filter(|j| j.tau < s && !same_time(j.tau, s)) {
                v += DVector::from_column_slice(&j.size);
            }
            v
        })
        .collect();
    let p0 = p.value(0).clone();
    let residual = (0..t.len())
        .map(|i| (p.value(i) - &p0 - &q[i] - &r[i]).norm())
        .fold(0.0, f64::max);
    let g = cand.x.grid_arc().clone();
    Ok(Decomposition {
        p0,
        q: SampledFn::new(g.clone(), q, None)?,
        r: SampledFn::new(g, r, None)?,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub verdict: Verdict,
    /// Largest `|lhs − rhs|` over the nodes.
    pub discrepancy: f64,
    pub lhs_end: f64,
    pub rhs_end: f64,
}

/// Integration by parts for the atom part: for `y(0) = 0`,
/// `∫_0^t ⟨r, ẏ⟩ ds = ⟨r(t), y(t)⟩ − Σ_{τ<t} ⟨β ν(τ) g_x, y(τ)⟩`.
pub fn hbr1_identity(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    cm: &ConstrainedMultipliers,
    y: &SampledFn,
    tol: f64,
) -> Result<IdentityReport> {
    if y.times() != cand.times() || y.dim() != pb.n {
        return Err(Error::GridMismatch("probe must live on the candidate grid".into()));
    }
    if y.value(0).norm() > 1e-12 {
        return Err(Error::PreconditionFailed("probe must satisfy y(0) = 0".into()));
    }
    let dec = decompose_adjoint(pb, cand, cm)?;
    let atoms = atom_jumps(pb, &cand.x, &cm.measures)?;
    let grid = cand.grid();
    let t = grid.nodes();
    let dy = y.derivative_or_fd();
    let integrand: Vec<f64> = (0..t.len()).map(|i| dec.r.value(i).dot(&dy[i])).collect();
    let lhs = quad::cumulative(t, &integrand, grid.jumps());
    let mut worst = 0.0f64;
    let mut rhs_end = 0.0;
    for i in 0..t.len() {
        let mut rhs = dec.r.value(i).dot(y.value(i));
        for j in atoms.iter().filter(|j| j.tau < t[i] && !same_time(j.tau, t[i])) {
            rhs -= DVector::from_column_slice(&j.size).dot(&y.value_at(j.tau));
        }
        worst = worst.max((lhs[i] - rhs).abs());
        rhs_end = rhs;
    }
    Ok(IdentityReport {
        verdict: Verdict::from_bool(worst <= tol),
        discrepancy: worst,
        lhs_end: *lhs.last().unwrap(),
        rhs_end,
    })
}

/// Maximum condition with the bounded-variation adjoint; nodes at atom times
/// are excluded from the almost-everywhere set.
pub fn constrained_max_condition(
    pb: &ControlProblem,
    cand: &CandidateProcess,
    cm: &ConstrainedMultipliers,
    sampler: &ControlSampler,
    tol: &MaxConditionTolerances,
) -> Result<MaxConditionReport> {
    check_measure_grids(cand, cm)?;
    extremal::max_condition_with(pb, cand, &cm.p(), cm.lambda0, sampler, tol, &cm.jump_nodes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_validation_and_csv_round_trip() {
        let g = Arc::new(Grid::uniform(10.0, 1001).unwrap());
        let dens = SampledFn::scalar(g.clone(), |t| (-t).exp(), None).unwrap();
        let m = ConstraintMeasure::new(0, dens.clone(), vec![Atom { tau: 1.0, beta: 0.5 }, Atom { tau: 2.0, beta: 1.0 }], 0.5)
            .unwrap();
        assert!((m.total_mass() - (1.0 - (-10f64).exp()) - 1.5).abs() < 1e-9, "{}", m.total_mass());
        let (mut a, mut b) = (Vec::new(), Vec::new());
        m.write_csv(&mut a, &mut b).unwrap();
        let back = ConstraintMeasure::read_csv(0, a.as_slice(), b.as_slice(), 1e-8, 0.5).unwrap();
        assert_eq!(back.atoms, m.atoms);
        assert_eq!(back.density.values(), m.density.values());
        assert!(ConstraintMeasure::new(0, dens.clone(), vec![Atom { tau: 2.0, beta: 1.0 }, Atom { tau: 1.0, beta: 1.0 }], 0.0).is_err());
        assert!(ConstraintMeasure::new(0, dens.scaled(-1.0), vec![], 0.0).is_err());
        assert!(ConstraintMeasure::zero(0, g).is_zero());
    }
}

//! Verification suites over a problem, a candidate process and optional
//! reference multipliers, producing a [`VerificationReport`].
//!
//! Numerical errors inside a check become inconclusive entries; a run never
//! aborts because one check could not be evaluated.

use crate::catalog::{EntryMeta, Instance, Multipliers, Params};
use crate::constraints::{self, ConstrainedMultipliers, ConstraintMeasure};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::extremal::{self, ControlSampler, MaxConditionReport, MaxConditionTolerances, PontryaginData, Perturbations};
use crate::problem::{self, AdmissibilityTolerances, CandidateProcess, ControlProblem, Tube};
use crate::report::{CheckResult, Provenance, VerificationReport, Verdict};
use crate::spaces::SampledFn;
use crate::sufficiency::{self, SufficiencyConfig};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Admissible,
    Pmp,
    Constrained,
    Sufficiency,
    Transversality,
    Michel,
    Normality,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Admissible,
        Suite::Pmp,
        Suite::Constrained,
        Suite::Sufficiency,
        Suite::Transversality,
        Suite::Michel,
        Suite::Normality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Admissible => "admissible",
            Suite::Pmp => "pmp",
            Suite::Constrained => "constrained",
            Suite::Sufficiency => "sufficiency",
            Suite::Transversality => "transversality",
            Suite::Michel => "michel",
            Suite::Normality => "normality",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// Parses a comma-separated suite list; duplicates are dropped.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut v: Vec<Suite> = s.split(',').filter(|p| !p.trim().is_empty()).map(Suite::from_str).collect::<Result<_>>()?;
    v.sort();
    v.dedup();
    if v.is_empty() {
        return Err(Error::Config("suite list is empty".into()));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative dynamics residual.
    pub dynamics: f64,
    /// Relative adjoint residual.
    pub adjoint: f64,
    /// Maximum-condition gap, relative to `max(λ₀, ‖p‖_∞)`.
    pub gap: f64,
    /// `‖H_u‖` at interior controls.
    pub stationarity: f64,
    /// Tail values for transversality and Michel.
    pub tail: f64,
    /// `‖ZᵀY − I‖`.
    pub duality: f64,
    /// Constraint values and control membership.
    pub constraint: f64,
    /// Stray measure mass.
    pub mass: f64,
    /// Agreement with reference multipliers.
    pub reference: f64,
    /// Integral form of the constrained adjoint equation.
    pub integral: f64,
    /// Sufficiency inequalities.
    pub sufficiency: f64,
    /// Reconstruction `p = p₀ + q + r`, relative to `max(1, ‖p‖_∞)`.
    pub decomposition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dynamics: 1e-6,
            adjoint: 1e-6,
            gap: 1e-8,
            stationarity: 1e-6,
            tail: 1e-6,
            duality: 1e-8,
            constraint: 1e-6,
            mass: 1e-8,
            reference: 1e-6,
            integral: 1e-5,
            sufficiency: 1e-8,
            decomposition: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    pub tol: Tolerances,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { suites: Suite::ALL.to_vec(), tol: Tolerances::default(), seed: 0, exec: Exec::default() }
    }
}

/// Everything a verification run looks at.
#[derive(Debug, Clone, Copy)]
pub struct Subject<'a> {
    pub name: &'a str,
    pub params: &'a Params,
    pub problem: &'a ControlProblem,
    pub candidate: &'a CandidateProcess,
    /// Reference multipliers for this candidate, if known.
    pub multipliers: Option<&'a Multipliers>,
    pub meta: &'a EntryMeta,
}

impl Instance {
    /// The reference process of the entry as a verification subject.
    pub fn subject(&self) -> Option<Subject<'_>> {
        Some(Subject {
            name: &self.name,
            params: &self.params,
            problem: &self.problem,
            candidate: self.reference.as_ref()?,
            multipliers: self.multipliers.as_ref(),
            meta: &self.meta,
        })
    }
}

/// Per-node time series written next to the report.
#[derive(Debug, Clone, Default)]
pub struct Series {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub gap: Vec<f64>,
}

impl Series {
    /// CSV with columns `t, x_*, u_*, p_*, H, gap`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        use crate::report::format_sig17 as f;
        let mut wr = csv::Writer::from_writer(w);
        let (n, m) = (self.x.first().map_or(0, Vec::len), self.u.first().map_or(0, Vec::len));
        let mut head = vec!["t".to_string()];
        let col = |base: &str, k: usize, dim: usize| if dim == 1 { base.to_string() } else { format!("{base}_{k}") };
        head.extend((0..n).map(|k| col("x", k, n)));
        head.extend((0..m).map(|k| col("u", k, m)));
        let pn = self.p.first().map_or(0, Vec::len);
        head.extend((0..pn).map(|k| col("p", k, pn)));
        head.push("H".into());
        head.push("gap".into());
        wr.write_record(&head)?;
        for i in 0..self.t.len() {
            let mut row = vec![f(self.t[i])];
            row.extend(self.x[i].iter().map(|v| f(*v)));
            row.extend(self.u[i].iter().map(|v| f(*v)));
            if let Some(p) = self.p.get(i) {
                row.extend(p.iter().map(|v| f(*v)));
            }
            row.push(f(*self.h.get(i).unwrap_or(&f64::NAN)));
            row.push(f(*self.gap.get(i).unwrap_or(&f64::NAN)));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: VerificationReport,
    pub series: Series,
}

fn error_check(name: &str, tag: &str, e: &Error) -> CheckResult {
    CheckResult::new(name, tag, Verdict::Inconclusive).note(format!("not evaluated: {e}"))
}

fn sampler(exec: Exec) -> ControlSampler {
    ControlSampler::default().with_exec(exec)
}

/// Multipliers chosen for the unconstrained suites.
struct Selected {
    pd: PontryaginData,
    route: &'static str,
    note: String,
}

struct Run<'a> {
    s: Subject<'a>,
    cfg: &'a VerifyConfig,
    checks: Vec<CheckResult>,
    selected: Option<std::result::Result<Selected, String>>,
    max_report: Option<MaxConditionReport>,
    /// Adjoint `(λ0, p)` of the state-constrained suite, exported when no
    /// unconstrained multipliers were selected.
    constrained_p: Option<(f64, SampledFn)>,
}

impl<'a> Run<'a> {
    fn mc_tol(&self) -> MaxConditionTolerances {
        MaxConditionTolerances { gap: self.cfg.tol.gap, stationarity: self.cfg.tol.stationarity }
    }

    fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    /// Normal multipliers from the representation formula when they satisfy
    /// the maximum condition, otherwise an abnormal certificate.
    fn select(&mut self) -> std::result::Result<&Selected, String> {
        if self.selected.is_none() {
            let r = self.compute_selected();
            self.selected = Some(r);
        }
        match self.selected.as_ref().unwrap() {
            Ok(s) => Ok(s),
            Err(e) => Err(e.clone()),
        }
    }

    fn compute_selected(&mut self) -> std::result::Result<Selected, String> {
        let (pb, cand) = (self.s.problem, self.s.candidate);
        let smp = sampler(self.cfg.exec);
        let tol = self.mc_tol();
        let normal = extremal::adjoint_via_representation(pb, cand).and_then(|p| PontryaginData::new(1.0, p));
        let normal_note = match normal {
            Ok(pd) => match extremal::max_condition_check(pb, cand, &pd, &smp, &tol) {
                Ok(r) if r.verdict.is_pass() => {
                    self.max_report = Some(r);
                    return Ok(Selected { pd, route: "normal", note: "λ₀ = 1 with p from the representation formula".into() });
                }
                Ok(r) => {
                    let note = format!("λ₀ = 1 representation violates the maximum condition (gap {:e})", r.worst_gap);
                    self.max_report = Some(r);
                    note
                }
                Err(e) => format!("λ₀ = 1 representation: {e}"),
            },
            Err(e) => format!("λ₀ = 1 representation unavailable: {e}"),
        };
        let probe = extremal::abnormality_probe(pb, cand, &smp, &tol, self.cfg.tol.tail).map_err(|e| format!("{normal_note}; {e}"))?;
        match probe.certificate {
            Some(cert) => {
                let fm = extremal::fundamental_matrices(pb, cand).map_err(|e| e.to_string())?;
                let p0 = problem::Vector::from_column_slice(&cert.p0);
                let t = cand.times();
                let vals: Vec<_> = fm.z.iter().map(|z| z * &p0).collect();
                let ders: Vec<_> = (0..t.len())
                    .map(|i| -((pb.phi_x)(t[i], cand.x.value(i), cand.u.value(i)).transpose() * &vals[i]))
                    .collect();
                let p = SampledFn::new(cand.x.grid_arc().clone(), vals, Some(ders)).map_err(|e| e.to_string())?;
                let pd = PontryaginData::new(0.0, p).map_err(|e| e.to_string())?;
                self.max_report = None;
                Ok(Selected {
                    pd,
                    route: "abnormal",
                    note: format!(
                        "{}; abnormal certificate λ₀ = 0, p(0) = {:?}, gap {:e}",
                        probe.normal_note, cert.p0, cert.gap
                    ),
                })
            }
            None => {
                // The normal multiplier passed inside the probe after all.
                let p = extremal::adjoint_via_representation(pb, cand).map_err(|e| e.to_string())?;
                let pd = PontryaginData::new(1.0, p).map_err(|e| e.to_string())?;
                Ok(Selected { pd, route: "normal", note: probe.normal_note })
            }
        }
    }

    fn admissible(&mut self) {
        let (pb, cand) = (self.s.problem, self.s.candidate);
        let tol = AdmissibilityTolerances { dynamics: self.cfg.tol.dynamics, constraint: self.cfg.tol.constraint };
        let rep = problem::check_admissible(pb, cand, &tol);
        for it in rep.items {
            self.push(CheckResult::new(&format!("admissible.{}", it.id), "ADM", it.verdict).residual(it.value, it.tolerance).note(it.note));
        }
        let name = "admissible.a2_growth";
        let growth = Tube::new(cand.x.clone(), self.s.meta.tube_gamma).and_then(|tube| problem::check_a2_growth(pb, &tube, &cand.u));
        let c = match growth {
            Ok(g) => {
                let mut c = CheckResult::new(name, "A2", g.verdict).witness("c0", g.c0_estimate).witness("gamma", self.s.meta.tube_gamma);
                for (k, l) in g.levels.iter().enumerate() {
                    c = c.witness(&format!("level_{k}"), *l);
                }
                c
            }
            Err(Error::EvaluationDomainError { t, detail }) => CheckResult::new(name, "A2", Verdict::Fail)
                .witness("t", t)
                .witness("gamma", self.s.meta.tube_gamma)
                .note(format!("f or φ undefined inside the uniform tube: {detail}")),
            Err(e) => error_check(name, "A2", &e),
        };
        self.push(c);
    }

    fn pmp(&mut self) {
        let (pb, cand) = (self.s.problem, self.s.candidate);
        match extremal::fundamental_matrices(pb, cand) {
            Ok(fm) => {
                let d = fm.duality_error();
                self.push(CheckResult::new("pmp.duality", "REPR", Verdict::from_bool(d <= self.cfg.tol.duality)).residual(d, self.cfg.tol.duality));
            }
            Err(e) => self.push(error_check("pmp.duality", "REPR", &e)),
        }
        let sel = match self.select() {
            Ok(s) => (s.pd.clone(), s.route, s.note.clone()),
            Err(e) => {
                self.push(CheckResult::new("pmp.multipliers", "PMP1", Verdict::Fail).note(e));
                return;
            }
        };
        let (pd, route, note) = sel;
        self.push(
            CheckResult::new("pmp.multipliers", "PMP1", Verdict::Pass)
                .witness("lambda0", pd.lambda0)
                .witness("p0_norm", pd.p.value(0).norm())
                .note(format!("{route}: {note}")),
        );
        let r = extremal::adjoint_residual(pb, cand, &pd);
        self.push(CheckResult::new("pmp.adjoint", "PMP2", Verdict::from_bool(r <= self.cfg.tol.adjoint)).residual(r, self.cfg.tol.adjoint));
        let mc = match self.max_report.take() {
            Some(r) if route == "normal" => Ok(r),
            _ => extremal::max_condition_check(pb, cand, &pd, &sampler(self.cfg.exec), &self.mc_tol()),
        };
        match mc {
            Ok(r) => {
                let mut c = CheckResult::new("pmp.max_condition", "PMP3", r.verdict)
                    .residual(r.worst_gap, self.cfg.tol.gap)
                    .witness("t", r.witness_t)
                    .witness("exceptional_measure", r.exceptional_measure);
                for (k, u) in r.witness_u.iter().enumerate() {
                    c = c.witness(&format!("u_{k}"), *u);
                }
                if let Some(s) = r.stationarity {
                    c = c.witness("stationarity", s);
                }
                if route == "abnormal" {
                    c = c.note("λ₀ = 0 abnormal certificate");
                }
                self.max_report = Some(r);
                self.push(c);
            }
            Err(e) => self.push(error_check("pmp.max_condition", "PMP3", &e)),
        }
        if let Some(m) = self.s.multipliers {
            let pr = m.p();
            if (m.lambda0() > 0.0) == (pd.lambda0 > 0.0) && pr.times() == pd.p.times() {
                // Abnormal multipliers are compared after normalizing p(0).
                let (a, b) = if pd.lambda0 > 0.0 {
                    (1.0 / pd.lambda0, 1.0 / m.lambda0())
                } else {
                    (1.0 / pd.p.value(0).norm().max(1e-300), 1.0 / pr.value(0).norm().max(1e-300))
                };
                let scale = pr.sup_norm().max(1.0) * b.max(1e-300);
                let diff = pd
                    .p
                    .values()
                    .iter()
                    .zip(pr.values())
                    .map(|(x, y)| (x * a - y * b).norm())
                    .fold(0.0f64, f64::max)
                    / scale;
                self.push(
                    CheckResult::new("pmp.reference_agreement", "PMP1", Verdict::from_bool(diff <= self.cfg.tol.reference))
                        .residual(diff, self.cfg.tol.reference),
                );
            } else if pr.times() == pd.p.times() {
                self.push(
                    CheckResult::new("pmp.reference_agreement", "PMP1", Verdict::Fail)
                        .witness("lambda0_reference", m.lambda0())
                        .witness("lambda0_found", pd.lambda0),
                );
            }
        }
    }

    fn transversality(&mut self) {
        let pd = match self.select() {
            Ok(s) => s.pd.clone(),
            Err(e) => return self.push(CheckResult::new("transversality", "TRANS", Verdict::Inconclusive).note(e)),
        };
        let (pb, cand) = (self.s.problem, self.s.candidate);
        match extremal::transversality_check(pb, &pd, std::slice::from_ref(&cand.x), self.s.meta.decay_mode, self.cfg.tol.tail) {
            Ok(r) => {
                for e in r.entries {
                    self.push(
                        CheckResult::new(&format!("transversality.{}", e.name), "TRANS", e.verdict)
                            .residual(e.end_value, self.cfg.tol.tail)
                            .note(e.note),
                    );
                }
            }
            Err(e) => self.push(error_check("transversality", "TRANS", &e)),
        }
    }

    fn michel(&mut self) {
        let pd = match self.select() {
            Ok(s) => s.pd.clone(),
            Err(e) => return self.push(CheckResult::new("michel.hamiltonian_tail", "MICHEL", Verdict::Inconclusive).note(e)),
        };
        let c = match extremal::michel_check(self.s.problem, self.s.candidate, &pd, self.s.meta.decay_mode, self.cfg.tol.tail) {
            Ok(r) => CheckResult::new("michel.hamiltonian_tail", "MICHEL", r.verdict)
                .residual(r.end_value, self.cfg.tol.tail)
                .note(format!("weight precondition: {}", r.precondition)),
            Err(Error::PreconditionFailed(m)) => {
                CheckResult::new("michel.hamiltonian_tail", "MICHEL", Verdict::Inconclusive).note(format!("precondition failed: {m}"))
            }
            Err(e) => error_check("michel.hamiltonian_tail", "MICHEL", &e),
        };
        self.push(c);
    }

    fn normality(&mut self) {
        let Some(mu) = self.s.meta.stability_mu.as_ref() else {
            return self.push(
                CheckResult::new("normality.condition_s", "S", Verdict::Inconclusive).note("no majorant μ is known for this problem"),
            );
        };
        let pert = Perturbations::standard(self.s.problem.n, 1e-3);
        let c = match extremal::normality_check_s(self.s.problem, self.s.candidate, &pert, mu) {
            Ok(r) => {
                let mut c = CheckResult::new("normality.condition_s", "S", r.verdict)
                    .witness("cs", r.cs_estimate)
                    .witness("mu_l2_norm_sq", r.mu_l2_norm_sq)
                    .note(format!("μ ∈ L₂(ν): {:?}", r.mu_in_l2));
                if let Some(t) = r.escape_time {
                    c = c.witness("escape_time", t);
                }
                c
            }
            Err(e) => error_check("normality.condition_s", "S", &e),
        };
        self.push(c);
    }

    fn suff_config(&self) -> SufficiencyConfig {
        SufficiencyConfig {
            gamma: self.s.meta.tube_gamma,
            seed: self.cfg.seed,
            tol: self.cfg.tol.sufficiency,
            sampler: sampler(self.cfg.exec),
            exec: self.cfg.exec,
            ..Default::default()
        }
    }

    /// Adjoint used by the sufficiency checks: the constrained reference when
    /// constraints are present, otherwise the selected normal multiplier.
    fn sufficiency_adjoint(&mut self) -> std::result::Result<SampledFn, String> {
        if !self.s.problem.constraints.is_empty() {
            if let Some(Multipliers::Constrained(cm)) = self.s.multipliers {
                return Ok(cm.p());
            }
        }
        let s = self.select()?;
        if s.pd.lambda0 == 0.0 {
            return Err("sufficiency needs normal multipliers (λ₀ = 1)".into());
        }
        Ok(s.pd.p.clone())
    }

    fn sufficiency(&mut self) {
        let p = match self.sufficiency_adjoint() {
            Ok(p) => p,
            Err(e) => return self.push(CheckResult::new("sufficiency.concavity", "SUFF", Verdict::Inconclusive).note(e)),
        };
        let (pb, cand) = (self.s.problem, self.s.candidate);
        let cfg = self.suff_config();
        let premise = "premise not checked: each trajectory admits exactly one admissible control";
        let c = match sufficiency::concavity_check(pb, cand, &p, &cfg) {
            Ok(r) => CheckResult::new("sufficiency.concavity", "SUFF", r.verdict)
                .residual(r.worst_violation, cfg.tol)
                .witness("t", r.witness_t)
                .witness("samples", r.samples as f64)
                .note(r.note)
                .note(premise),
            Err(e) => error_check("sufficiency.concavity", "SUFF", &e),
        };
        self.push(c);
        if let Some(lambda) = &self.s.meta.strict_lambda {
            let p_dot = p.derivative_or_fd();
            let c = match sufficiency::strict_growth_check(pb, cand, &p, &p_dot, lambda, &cfg) {
                Ok(r) => CheckResult::new("sufficiency.strict_growth", "SUFF", r.verdict)
                    .residual(r.worst_violation, cfg.tol)
                    .witness("t", r.witness_t)
                    .note(r.note),
                Err(e) => error_check("sufficiency.strict_growth", "SUFF", &e),
            };
            self.push(c);
        }
        if !pb.constraints.is_empty() {
            let c = match Tube::new(cand.x.clone(), cfg.gamma).and_then(|tube| sufficiency::constraint_convexity_check(pb, &tube, &cfg)) {
                Ok(r) => CheckResult::new("sufficiency.constraint_convexity", "SUFF", r.verdict)
                    .residual(r.worst_violation, cfg.tol)
                    .note(r.note),
                Err(e) => error_check("sufficiency.constraint_convexity", "SUFF", &e),
            };
            self.push(c);
        }
    }

    fn constrained_multipliers(&mut self) -> std::result::Result<ConstrainedMultipliers, String> {
        if let Some(Multipliers::Constrained(cm)) = self.s.multipliers {
            // Measures of constraints that were removed are dropped.
            let k = self.s.problem.constraints.len();
            let measures: Vec<ConstraintMeasure> = cm.measures.iter().filter(|m| m.constraint_index < k).cloned().collect();
            return ConstrainedMultipliers::new(cm.lambda0, cm.smooth.clone(), cm.jumps.clone(), measures).map_err(|e| e.to_string());
        }
        let grid = self.s.candidate.x.grid_arc().clone();
        let k = self.s.problem.constraints.len();
        let s = self.select()?;
        let measures = (0..k).map(|j| ConstraintMeasure::zero(j, grid.clone())).collect();
        ConstrainedMultipliers::new(s.pd.lambda0, s.pd.p.clone(), Vec::new(), measures).map_err(|e| e.to_string())
    }

    fn constrained(&mut self) {
        let (pb, cand) = (self.s.problem, self.s.candidate);
        let tol = self.cfg.tol;
        let active = problem::active_indices(pb, &cand.x, tol.constraint);
        let mut c = CheckResult::new("constrained.active_set", "I", Verdict::Pass).witness("active", active.indices().len() as f64);
        for e in &active.entries {
            c = c.note(format!(
                "{}: sup g = {:e}, active = {}, attained only at infinity = {}, finite active times = {}",
                e.name,
                e.sup,
                e.active,
                e.attained_at_infinity,
                e.active_times.len()
            ));
        }
        self.push(c);
        self.push(CheckResult::new("constrained.condition_f", "F", problem::check_condition_f(pb, &cand.x, tol.constraint)));
        let cm = match self.constrained_multipliers() {
            Ok(cm) => cm,
            Err(e) => return self.push(CheckResult::new("constrained.multipliers", "PMP1", Verdict::Fail).note(e)),
        };
        for m in &cm.measures {
            let name = format!("constrained.support.{}", m.constraint_index);
            let c = match constraints::support_check(pb, &cand.x, m, tol.constraint, tol.mass) {
                Ok(r) => CheckResult::new(&name, "SUPP", r.verdict).residual(r.stray_mass, tol.mass).witness("total_mass", m.total_mass()),
                Err(e) => error_check(&name, "SUPP", &e),
            };
            self.push(c);
        }
        let c = match constraints::integral_adjoint_residual(pb, cand, &cm) {
            Ok(r) => CheckResult::new("constrained.adjoint", "PMP2", Verdict::from_bool(r <= tol.integral)).residual(r, tol.integral),
            Err(e) => error_check("constrained.adjoint", "PMP2", &e),
        };
        self.push(c);
        let c = match constraints::constrained_transversality(pb, &cm, self.s.meta.decay_mode, tol.tail) {
            Ok(r) => {
                let mut c = CheckResult::new("constrained.transversality", "TRANS", r.verdict());
                for e in r.entries {
                    c = c.witness(&e.name, e.end_value);
                }
                c
            }
            Err(e) => error_check("constrained.transversality", "TRANS", &e),
        };
        self.push(c);
        self.constrained_p = Some((cm.lambda0, cm.p()));
        let c = match constraints::constrained_max_condition(pb, cand, &cm, &sampler(self.cfg.exec), &self.mc_tol()) {
            Ok(r) => {
                let c = CheckResult::new("constrained.max_condition", "PMP3", r.verdict)
                    .residual(r.worst_gap, tol.gap)
                    .witness("t", r.witness_t);
                if self.max_report.is_none() {
                    self.max_report = Some(r);
                }
                c
            }
            Err(e) => error_check("constrained.max_condition", "PMP3", &e),
        };
        self.push(c);
        let c = match constraints::decompose_adjoint(pb, cand, &cm) {
            Ok(d) => {
                let rel = d.residual / cm.p().sup_norm().max(1.0);
                CheckResult::new("constrained.decomposition", "DECOMP", Verdict::from_bool(rel <= tol.decomposition))
                    .residual(rel, tol.decomposition)
            }
            Err(e) => error_check("constrained.decomposition", "DECOMP", &e),
        };
        self.push(c);
    }

    fn series(&mut self) -> Series {
        let cand = self.s.candidate;
        let t = cand.times().to_vec();
        let x = cand.x.values().iter().map(|v| v.as_slice().to_vec()).collect();
        let u = cand.u.values().iter().map(|v| v.as_slice().to_vec()).collect();
        let adj = match self.selected.as_ref() {
            Some(Ok(s)) => Some((s.pd.lambda0, &s.pd.p)),
            _ => self.constrained_p.as_ref().map(|(l, p)| (*l, p)),
        };
        let (p, h) = match adj {
            Some((lambda0, pf)) => {
                let p: Vec<Vec<f64>> = pf.values().iter().map(|v| v.as_slice().to_vec()).collect();
                let h = (0..t.len())
                    .map(|i| self.s.problem.hamiltonian(t[i], cand.x.value(i), cand.u.value(i), pf.value(i), lambda0))
                    .collect();
                (p, h)
            }
            None => (Vec::new(), vec![f64::NAN; t.len()]),
        };
        let gap = self.max_report.as_ref().map_or_else(|| vec![f64::NAN; t.len()], |r| r.gaps.clone());
        Series { t, x, u, p, h, gap }
    }
}

/// Runs the configured suites on `subject`.
pub fn verify(subject: Subject<'_>, cfg: &VerifyConfig) -> Outcome {
    let mut run = Run { s: subject, cfg, checks: Vec::new(), selected: None, max_report: None, constrained_p: None };
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    for s in &suites {
        match s {
            Suite::Admissible => run.admissible(),
            Suite::Pmp => run.pmp(),
            Suite::Constrained => run.constrained(),
            Suite::Sufficiency => run.sufficiency(),
            Suite::Transversality => run.transversality(),
            Suite::Michel => run.michel(),
            Suite::Normality => run.normality(),
        }
    }
    let series = run.series();
    let grid = subject.candidate.grid();
    let provenance = Provenance { grid_nodes: grid.len(), t_max: grid.t_max(), seed: cfg.seed };
    let report = VerificationReport::new(
        subject.name,
        subject.params.clone(),
        suites.iter().map(|s| s.name().to_string()).collect(),
        run.checks,
        provenance,
    );
    Outcome { report, series }
}

/// Runs the suites an entry designates for its reference.
pub fn verify_entry(inst: &Instance, cfg: &VerifyConfig) -> Result<Outcome> {
    let subject = inst.subject().ok_or_else(|| Error::Config(format!("{} has no reference process", inst.name)))?;
    Ok(verify(subject, cfg))
}

/// Suites an entry designates, parsed.
pub fn designated_suites(meta: &EntryMeta) -> Vec<Suite> {
    meta.suites.iter().filter_map(|s| s.parse().ok()).collect()
}

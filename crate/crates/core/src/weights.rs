//! Weight functions ν and distribution functions ω, with numeric verifiers for
//! the property sets (E1)–(E7) and (E*0)–(E*7).

use crate::error::{Error, Result};
use crate::quad::{self, classify_doublings, Improper, Settle, ShellConfig};
use crate::report::Verdict;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightFamily {
    /// ν(t) = e^{−a t}
    Exponential { a: f64 },
    /// ν(t) = (1 + t)^{−a}
    PowerLaw { a: f64 },
    /// Piecewise-linear interpolation of samples `(t_i, v_i)`, `t_0 = 0`.
    Tabulated { t: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub description: String,
}

impl WeightSpec {
    pub fn exponential(a: f64) -> Self {
        WeightSpec {
            family: WeightFamily::Exponential { a },
            description: format!("exp(-{a} t)"),
        }
    }

    pub fn power_law(a: f64) -> Self {
        WeightSpec {
            family: WeightFamily::PowerLaw { a },
            description: format!("(1+t)^-{a}"),
        }
    }

    pub fn tabulated(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != v.len() {
            return Err(Error::GridMismatch(
                "tabulated weight needs at least two (t, v) pairs of equal length".into(),
            ));
        }
        if t[0] != 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "tabulated weight times must start at 0 and increase strictly".into(),
            ));
        }
        Ok(WeightSpec {
            family: WeightFamily::Tabulated { t, v },
            description: "tabulated".into(),
        })
    }

    /// Largest time at which the weight is defined.
    pub fn domain_end(&self) -> f64 {
        match &self.family {
            WeightFamily::Tabulated { t, .. } => *t.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    fn raw(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::EvaluationDomainError {
                t,
                detail: "weights are defined for t >= 0".into(),
            });
        }
        Ok(match &self.family {
            WeightFamily::Exponential { a } => (-a * t).exp(),
            WeightFamily::PowerLaw { a } => (1.0 + t).powf(-a),
            WeightFamily::Tabulated { t: ts, v } => {
                if t > *ts.last().unwrap() {
                    return Err(Error::GridMismatch(format!(
                        "t = {t} beyond last tabulated point {}",
                        ts.last().unwrap()
                    )));
                }
                let i = quad::locate(ts, t);
                let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
                v[i] + s * (v[i + 1] - v[i])
            }
        })
    }

    /// ν(t); errors with `NonPositiveValue` when the weight is inadmissible at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = self.raw(t)?;
        if !(v > 0.0) || !v.is_finite() {
            // Underflow of a positive parametric weight is not a sign error.
            if v == 0.0 && !matches!(self.family, WeightFamily::Tabulated { .. }) {
                return Ok(f64::MIN_POSITIVE);
            }
            return Err(Error::NonPositiveValue { t, value: v });
        }
        Ok(v)
    }

    /// ln ν(t), computed without under/overflow for the parametric families.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        match &self.family {
            WeightFamily::Exponential { a } if t >= 0.0 => Ok(-a * t),
            WeightFamily::PowerLaw { a } if t >= 0.0 => Ok(-a * t.ln_1p()),
            _ => Ok(self.eval(t)?.ln()),
        }
    }

    /// ln ν(t) − ln ν(t − σ) for 0 ≤ σ ≤ t, accurate for large t.
    pub fn ln_ratio_back(&self, t: f64, sigma: f64) -> Result<f64> {
        match &self.family {
            WeightFamily::Exponential { a } => Ok(-a * sigma),
            WeightFamily::PowerLaw { a } => Ok(a * (-sigma / (1.0 + t)).ln_1p()),
            WeightFamily::Tabulated { .. } => Ok(self.ln_eval(t)? - self.ln_eval(t - sigma)?),
        }
    }

    /// ν̇(t): analytic for parametric families, cell slope for tabulated data.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(match &self.family {
            WeightFamily::Exponential { a } => -a * (-a * t).exp(),
            WeightFamily::PowerLaw { a } => -a * (1.0 + t).powf(-a - 1.0),
            WeightFamily::Tabulated { t: ts, v } => {
                self.raw(t)?;
                let i = quad::locate(ts, t);
                (v[i + 1] - v[i]) / (ts[i + 1] - ts[i])
            }
        })
    }
}

/// Free-function form of [`WeightSpec::eval`].
pub fn eval_weight(spec: &WeightSpec, t: f64) -> Result<f64> {
    spec.eval(t)
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            WeightFamily::Exponential { a } => write!(f, "exp:{a}"),
            WeightFamily::PowerLaw { a } => write!(f, "power:{a}"),
            WeightFamily::Tabulated { t, .. } => write!(f, "tabulated[{}]", t.len()),
        }
    }
}

fn parse_family(s: &str) -> Result<(String, f64)> {
    let (kind, val) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("expected <family>:<parameter>, got '{s}'")))?;
    let v: f64 = val
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad numeric parameter in '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("non-finite parameter in '{s}'")));
    }
    Ok((kind.trim().to_ascii_lowercase(), v))
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// `exp:<a>` or `power:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, v) = parse_family(s)?;
        match kind.as_str() {
            "exp" | "exponential" => Ok(WeightSpec::exponential(v)),
            "power" | "powerlaw" => Ok(WeightSpec::power_law(v)),
            _ => Err(Error::Config(format!("unknown weight family '{kind}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DistributionFamily {
    /// ω(t) = e^{−ρ t}
    Exponential { rho: f64 },
    /// ω(t) = t^{k−1} e^{−t^k}
    Weibull { k: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: DistributionFamily,
    pub description: String,
}

impl DistributionSpec {
    pub fn exponential(rho: f64) -> Self {
        DistributionSpec {
            family: DistributionFamily::Exponential { rho },
            description: format!("exp(-{rho} t)"),
        }
    }

    pub fn weibull(k: f64) -> Self {
        DistributionSpec {
            family: DistributionFamily::Weibull { k },
            description: format!("t^({k}-1) exp(-t^{k})"),
        }
    }

    /// True when ω is unbounded at t = 0 but integrable there.
    pub fn singular_at_zero(&self) -> bool {
        matches!(self.family, DistributionFamily::Weibull { k } if k < 1.0)
    }

    /// ω(t); `+∞` at t = 0 for a singular Weibull density.
    pub fn eval(&self, t: f64) -> f64 {
        match self.family {
            DistributionFamily::Exponential { rho } => (-rho * t).exp(),
            DistributionFamily::Weibull { k } => {
                if t == 0.0 {
                    if k < 1.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    }
                } else {
                    self.ln_eval(t).exp()
                }
            }
        }
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        match self.family {
            DistributionFamily::Exponential { rho } => -rho * t,
            DistributionFamily::Weibull { k } => (k - 1.0) * t.ln() - t.powf(k),
        }
    }

    /// `∫_a^b ω(t) dt` in closed form.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        match self.family {
            DistributionFamily::Exponential { rho } => ((-rho * a).exp() - (-rho * b).exp()) / rho,
            DistributionFamily::Weibull { k } => ((-a.powf(k)).exp() - (-b.powf(k)).exp()) / k,
        }
    }

    /// `∫_0^T ω(t) F(t) dt`. For a singular Weibull density the substitution
    /// s = t^k turns the integral into `(1/k) ∫_0^{T^k} e^{−s} F(s^{1/k}) ds`,
    /// which has no singularity.
    pub fn integrate_against(&self, big_f: &dyn Fn(f64) -> f64, t_end: f64, pieces: usize) -> f64 {
        match self.family {
            DistributionFamily::Weibull { k } if k < 1.0 => {
                let s_end = t_end.powf(k);
                let g = |s: f64| (-s).exp() * big_f(s.powf(1.0 / k));
                quad::gauss8_composite(&g, 0.0, s_end, pieces) / k
            }
            _ => {
                let g = |t: f64| self.eval(t) * big_f(t);
                quad::gauss8_composite(&g, 0.0, t_end, pieces)
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            DistributionFamily::Exponential { rho } => write!(f, "exp:{rho}"),
            DistributionFamily::Weibull { k } => write!(f, "weibull:{k}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// `exp:<rho>` or `weibull:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, v) = parse_family(s)?;
        match kind.as_str() {
            "exp" | "exponential" => Ok(DistributionSpec::exponential(v)),
            "weibull" => Ok(DistributionSpec::weibull(v)),
            _ => Err(Error::Config(format!("unknown distribution family '{kind}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub shells: ShellConfig,
    /// Dense uniform sampling for monotonicity/positivity covers `[0, sample_t_max]`.
    pub sample_t_max: f64,
    pub samples: usize,
    /// Log-spaced sampling continues up to `2^max_log2`.
    pub max_log2: u32,
    /// Step of the finite differences used for (E4).
    pub fd_step: f64,
    /// Tolerance below which t·ν(t) counts as vanished for (E*5).
    pub tail_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            shells: ShellConfig::default(),
            sample_t_max: 60.0,
            samples: 4097,
            max_log2: 60,
            fd_step: 1e-5,
            tail_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub id: String,
    pub verdict: Verdict,
    pub witness: BTreeMap<String, f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub nu: String,
    pub omega: String,
    /// Sobolev exponent for the starred set; absent for (E1)–(E7).
    pub p: Option<f64>,
    pub entries: Vec<PropertyEntry>,
}

impl PropertyReport {
    pub fn get(&self, id: &str) -> Option<&PropertyEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.get(id).map(|e| e.verdict)
    }

    pub fn summary(&self) -> Verdict {
        Verdict::combine(self.entries.iter().map(|e| e.verdict))
    }
}

fn entry(id: &str, verdict: Verdict, witness: &[(&str, f64)], note: impl Into<String>) -> PropertyEntry {
    PropertyEntry {
        id: id.to_string(),
        verdict,
        witness: witness.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        note: note.into(),
    }
}

fn sample_times(nu: &WeightSpec, q: &QuadratureConfig) -> Vec<f64> {
    let end = nu.domain_end();
    let mut ts: Vec<f64> = (0..q.samples)
        .map(|i| q.sample_t_max * i as f64 / (q.samples - 1).max(1) as f64)
        .filter(|&t| t <= end)
        .collect();
    let mut j = 0u32;
    loop {
        let t = (j as f64 / 4.0).exp2();
        if t > end || j > 4 * q.max_log2 {
            break;
        }
        if t > q.sample_t_max {
            ts.push(t);
        }
        j += 1;
    }
    if end.is_finite() && ts.last() != Some(&end) {
        ts.push(end);
    }
    ts
}

fn settle_verdict(s: Settle) -> Verdict {
    match s {
        Settle::Plateau | Settle::Geometric => Verdict::Pass,
        Settle::Diverged => Verdict::Fail,
        Settle::Unsettled => Verdict::Inconclusive,
    }
}

fn settle_note(s: Settle) -> &'static str {
    match s {
        Settle::Plateau => "plateau over three successive doublings",
        Settle::Geometric => "increments shrink geometrically; limit extrapolated",
        Settle::Diverged => "increments do not shrink: divergent",
        Settle::Unsettled => "quadrature did not settle within the configured range",
    }
}

/// `∫_0^∞ h` as the sum of the parts below and above t = 1.
fn half_line(h: &dyn Fn(f64) -> f64, shells: &ShellConfig) -> (f64, Settle) {
    let lo: Improper = quad::integrate_to_zero(h, 1.0, shells);
    let hi: Improper = quad::integrate_to_infinity(h, 1.0, shells);
    let settle = match (lo.settle, hi.settle) {
        (Settle::Diverged, _) | (_, Settle::Diverged) => Settle::Diverged,
        (Settle::Unsettled, _) | (_, Settle::Unsettled) => Settle::Unsettled,
        (Settle::Geometric, _) | (_, Settle::Geometric) => Settle::Geometric,
        _ => Settle::Plateau,
    };
    (lo.value + hi.value, settle)
}

fn e1(nu: &WeightSpec, ts: &[f64]) -> PropertyEntry {
    let mut min_v = f64::INFINITY;
    for &t in ts {
        match nu.eval(t) {
            Ok(v) => min_v = min_v.min(v),
            Err(_) => {
                let v = nu.raw(t).unwrap_or(f64::NAN);
                return entry("E1", Verdict::Fail, &[("t", t), ("value", v)], "non-positive or non-finite sample");
            }
        }
    }
    entry("E1", Verdict::Pass, &[("min_sampled_value", min_v)], "positive and finite at all samples")
}

fn e2(nu: &WeightSpec, ts: &[f64]) -> PropertyEntry {
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for w in ts.windows(2) {
        let (Ok(a), Ok(b)) = (nu.ln_eval(w[0]), nu.ln_eval(w[1])) else {
            return entry("E2", Verdict::Fail, &[("t", w[0])], "weight not evaluable");
        };
        if b - a > worst {
            worst = b - a;
            at = w[1];
        }
    }
    if worst > 1e-12 {
        entry("E2", Verdict::Fail, &[("t", at), ("log_increase", worst)], "weight increases")
    } else {
        entry("E2", Verdict::Pass, &[], "non-increasing at all samples")
    }
}

fn e3(nu: &WeightSpec, shells: &ShellConfig) -> PropertyEntry {
    let (int_nu, s1) = half_line(&|t| nu.eval(t).unwrap_or(f64::NAN), shells);
    let (int_dnu, s2) = half_line(&|t| nu.derivative(t).map(f64::abs).unwrap_or(f64::NAN), shells);
    let v = Verdict::combine([settle_verdict(s1), settle_verdict(s2)]);
    entry(
        "E3",
        v,
        &[("integral_nu", int_nu), ("integral_abs_dnu", int_dnu)],
        format!("∫ν: {}; ∫|ν'|: {}", settle_note(s1), settle_note(s2)),
    )
}

fn e4(nu: &WeightSpec, ts: &[f64], q: &QuadratureConfig) -> PropertyEntry {
    let log_slope = |t: f64| -> f64 {
        let h = q.fd_step * t.max(1.0);
        let lo = (t - h).max(0.0);
        let hi = t + h;
        match (nu.ln_eval(lo), nu.ln_eval(hi.min(nu.domain_end()))) {
            (Ok(a), Ok(b)) => ((b - a) / (hi.min(nu.domain_end()) - lo)).abs(),
            _ => f64::NAN,
        }
    };
    let mut k_body = 0.0f64;
    let mut k_all = 0.0f64;
    for &t in ts {
        let k = log_slope(t);
        if !k.is_finite() {
            return entry("E4", Verdict::Fail, &[("t", t)], "|ν'|/ν not finite");
        }
        k_all = k_all.max(k);
        if t <= q.sample_t_max {
            k_body = k_body.max(k);
        }
    }
    let stable = k_all <= k_body * (1.0 + 1e-6) + 1e-9;
    let v = if stable { Verdict::Pass } else { Verdict::Inconclusive };
    entry(
        "E4",
        v,
        &[("K", k_all), ("K_body", k_body)],
        if stable { "sup |ν'|/ν finite and attained on the sampled body" } else { "K estimate still growing in the tail" },
    )
}

fn e5(nu: &WeightSpec, q: &QuadratureConfig) -> PropertyEntry {
    let mut values = Vec::new();
    let mut ends = Vec::new();
    let mut settle = Settle::Unsettled;
    let mut limit = f64::NAN;
    for j in -2..=(q.max_log2 as i32) {
        let t = (j as f64).exp2();
        if t > nu.domain_end() {
            break;
        }
        let integrand = |sigma: f64| nu.ln_ratio_back(t, sigma).map(f64::exp).unwrap_or(f64::NAN);
        let s = quad::integrate_to_zero(&integrand, t, &q.shells);
        if !s.settle.is_finite() {
            return entry("E5", Verdict::Inconclusive, &[("t", t)], "inner integral did not settle");
        }
        values.push(s.value);
        ends.push(t);
        if values.len() >= 4 {
            let (st, lim) = classify_doublings(&values);
            settle = st;
            limit = lim;
            if st == Settle::Plateau || (st == Settle::Diverged && t >= q.shells.min_span) {
                break;
            }
            if st == Settle::Diverged {
                settle = Settle::Unsettled;
            }
        }
    }
    let sup = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let v = settle_verdict(settle);
    entry(
        "E5",
        v,
        &[("sup_S", sup.max(limit.max(f64::NEG_INFINITY))), ("t_reached", *ends.last().unwrap_or(&0.0))],
        format!("S(t) = ∫₀ᵗ ν(t)/ν(s) ds: {}", settle_note(settle)),
    )
}

fn omega_power(id: &str, nu: &WeightSpec, omega: &DistributionSpec, q_exp: f64, shells: &ShellConfig) -> PropertyEntry {
    // ∫ ν^{1−q} ω^q in log space.
    let h = |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::NAN;
        }
        match nu.ln_eval(t) {
            Ok(ln_nu) => ((1.0 - q_exp) * ln_nu + q_exp * omega.ln_eval(t)).exp(),
            Err(_) => f64::NAN,
        }
    };
    let (value, settle) = half_line(&h, shells);
    let label = if q_exp == 1.0 { "∫ω" } else { "∫ν^(1-q) ω^q" };
    entry(id, settle_verdict(settle), &[("integral", value), ("q", q_exp)], format!("{label}: {}", settle_note(settle)))
}

/// Verifies (E1)–(E7) for the pair (ν, ω).
pub fn check_properties_p2(nu: &WeightSpec, omega: &DistributionSpec, quad: &QuadratureConfig) -> PropertyReport {
    let ts = sample_times(nu, quad);
    let entries = vec![
        e1(nu, &ts),
        e2(nu, &ts),
        e3(nu, &quad.shells),
        e4(nu, &ts, quad),
        e5(nu, quad),
        omega_power("E6", nu, omega, 1.0, &quad.shells),
        omega_power("E7", nu, omega, 2.0, &quad.shells),
    ];
    PropertyReport {
        nu: nu.to_string(),
        omega: omega.to_string(),
        p: None,
        entries,
    }
}

fn e_star5(nu: &WeightSpec, q: &QuadratureConfig) -> PropertyEntry {
    let mut lns = Vec::new();
    let mut ts = Vec::new();
    for j in 0..=(4 * q.max_log2) {
        let t = (j as f64 / 4.0).exp2();
        if t > nu.domain_end() {
            break;
        }
        match nu.ln_eval(t) {
            Ok(l) => {
                lns.push(t.ln() + l);
                ts.push(t);
            }
            Err(_) => return entry("E*5", Verdict::Fail, &[("t", t)], "weight not evaluable"),
        }
    }
    let n = lns.len();
    if n < 10 {
        return entry("E*5", Verdict::Inconclusive, &[], "too few tail samples");
    }
    let tail = &lns[n - n / 5..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let last = (*tail.last().unwrap()).exp();
    let slopes: Vec<f64> = tail
        .windows(2)
        .map(|w| (w[1] - w[0]) / std::f64::consts::LN_2 * 4.0)
        .collect();
    let max_slope = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = [("t_nu_at_end", last), ("t_end", *ts.last().unwrap()), ("max_log_slope", max_slope)];
    if decreasing && (last < q.tail_tol || max_slope <= -0.01) {
        entry("E*5", Verdict::Pass, &w, "t·ν(t) decreases to 0 on the tail")
    } else if !decreasing && max_slope >= 0.0 {
        entry("E*5", Verdict::Fail, &w, "t·ν(t) does not decay")
    } else {
        entry("E*5", Verdict::Inconclusive, &w, "tail of t·ν(t) not settled")
    }
}

/// Verifies (E*0)–(E*7) for the pair (ν, ω) and Sobolev exponent `p`.
pub fn check_properties_star(
    nu: &WeightSpec,
    omega: &DistributionSpec,
    p: f64,
    quad: &QuadratureConfig,
) -> PropertyReport {
    let ts = sample_times(nu, quad);
    let valid_p = p > 1.0 && p.is_finite();
    let q = if valid_p { p / (p - 1.0) } else { f64::NAN };
    let rename = |mut e: PropertyEntry, id: &str| {
        e.id = id.to_string();
        e
    };
    let mut entries = vec![entry(
        "E*0",
        Verdict::from_bool(valid_p),
        &[("p", p), ("q", q)],
        if valid_p { "1 < p < ∞, dual exponent q = p/(p-1)" } else { "exponent must satisfy 1 < p < ∞" },
    )];
    entries.push(rename(e1(nu, &ts), "E*1"));
    entries.push(rename(e2(nu, &ts), "E*2"));
    entries.push(rename(e3(nu, &quad.shells), "E*3"));
    entries.push(rename(e4(nu, &ts, quad), "E*4"));
    entries.push(e_star5(nu, quad));
    entries.push(omega_power("E*6", nu, omega, 1.0, &quad.shells));
    if valid_p {
        entries.push(omega_power("E*7", nu, omega, q, &quad.shells));
    } else {
        entries.push(entry("E*7", Verdict::Fail, &[], "undefined without a valid exponent"));
    }
    PropertyReport {
        nu: nu.to_string(),
        omega: omega.to_string(),
        p: Some(p),
        entries,
    }
}

/// `∫_0^∞ ν^{1−q} ω^q` with its settling verdict, as used in the Hölder bound.
pub fn dual_integral(nu: &WeightSpec, omega: &DistributionSpec, q: f64, shells: &ShellConfig) -> (f64, Settle) {
    let e = omega_power("dual", nu, omega, q, shells);
    let v = e.witness["integral"];
    let s = match e.verdict {
        Verdict::Pass => Settle::Plateau,
        Verdict::Fail => Settle::Diverged,
        Verdict::Inconclusive => Settle::Unsettled,
    };
    (v, s)
}

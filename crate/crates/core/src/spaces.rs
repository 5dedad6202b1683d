//! Time grids, sampled vector functions, weighted L_p / W¹_p norms and the
//! weighted-space decay lemmas as tail checks.

use crate::error::{Error, Result};
use crate::quad::{self, classify_doublings, Settle};
use crate::report::Verdict;
use crate::weights::{DistributionSpec, WeightSpec};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::sync::Arc;

/// Default tail tolerance for decay verdicts.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Cells narrower than this fraction of the median cell are jump cells.
const JUMP_CELL_RATIO: f64 = 1e-6;

/// Strictly increasing nodes `0 = t_0 < … < t_N = T_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    pub tail_tol: f64,
    /// Cells `[t_i, t_{i+1}]` across which sampled data may jump.
    jumps: Vec<usize>,
}

impl Grid {
    pub fn new(nodes: Vec<f64>, tail_tol: f64) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid("a grid needs at least 3 nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("first node must be t = 0".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        if !(tail_tol >= 0.0) {
            return Err(Error::InvalidGrid("tail tolerance must be nonnegative".into()));
        }
        let mut widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sorted = widths.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let jumps = widths
            .iter_mut()
            .enumerate()
            .filter(|(_, w)| **w < JUMP_CELL_RATIO * median)
            .map(|(i, _)| i)
            .collect();
        Ok(Grid { nodes, tail_tol, jumps })
    }

    pub fn uniform(t_max: f64, n: usize) -> Result<Self> {
        if n < 3 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid("need n >= 3 and T_max > 0".into()));
        }
        Grid::new(
            (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
            DEFAULT_TAIL_TOL,
        )
    }

    /// Uniform body with a few geometrically refined nodes inside the first cell.
    pub fn default_grid(t_max: f64, n: usize) -> Result<Self> {
        if n < 16 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid("need n >= 16 and T_max > 0".into()));
        }
        let g = (n / 8).min(8);
        let body = n - g;
        let h = t_max / (body - 1) as f64;
        let mut nodes = Vec::with_capacity(n);
        nodes.push(0.0);
        for k in (1..=g).rev() {
            nodes.push(h * (-(k as f64)).exp2());
        }
        for i in 1..body {
            nodes.push(if i == body - 1 { t_max } else { h * i as f64 });
        }
        Grid::new(nodes, DEFAULT_TAIL_TOL)
    }

    /// Returns a grid containing every breakpoint `b` as a node, followed by a
    /// twin node just after it so that data may jump at `b`. Existing nodes
    /// close to a breakpoint are moved onto it.
    pub fn with_breakpoints(&self, breaks: &[f64]) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        // Twin offset well inside the jump-cell threshold of `Grid::new`.
        let mut widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let twin = 0.01 * JUMP_CELL_RATIO * widths[widths.len() / 2];
        for &b in breaks {
            if !(b > 0.0 && b < self.t_max()) {
                continue;
            }
            let i = quad::locate(&nodes, b);
            let h = nodes[i + 1] - nodes[i];
            let eps = twin.max(4.0 * f64::EPSILON * b);
            if (b - nodes[i]).abs() <= 0.25 * h && i > 0 {
                nodes[i] = b;
                if nodes[i + 1] - b > 0.25 * h {
                    nodes.insert(i + 1, b + eps);
                } else {
                    nodes[i + 1] = b + eps;
                }
            } else if (nodes[i + 1] - b).abs() <= 0.25 * h && i + 2 < nodes.len() {
                nodes[i + 1] = b;
                nodes.insert(i + 2, b + eps);
            } else {
                nodes.insert(i + 1, b);
                nodes.insert(i + 2, b + eps);
            }
        }
        Grid::new(nodes, self.tail_tol)
    }

    /// Inserts the midpoint of every cell (jump cells stay unsplit).
    pub fn refined(&self) -> Result<Self> {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for (i, w) in self.nodes.windows(2).enumerate() {
            nodes.push(w[0]);
            if !self.jumps.contains(&i) {
                nodes.push(0.5 * (w[0] + w[1]));
            }
        }
        nodes.push(self.t_max());
        Grid::new(nodes, self.tail_tol)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn jumps(&self) -> &[usize] {
        &self.jumps
    }

    /// Median cell width.
    pub fn typical_step(&self) -> f64 {
        let mut w: Vec<f64> = self.nodes.windows(2).map(|w| w[1] - w[0]).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w[w.len() / 2]
    }

    /// Index of the first node of the tail (last 20% of nodes).
    pub fn tail_start(&self) -> usize {
        self.len() - (self.len() / 5).max(2)
    }

    /// Measure attributed to node `i` (half of each adjacent cell).
    pub fn node_measure(&self, i: usize) -> f64 {
        let n = self.len();
        let left = if i > 0 { self.nodes[i] - self.nodes[i - 1] } else { 0.0 };
        let right = if i + 1 < n { self.nodes[i + 1] - self.nodes[i] } else { 0.0 };
        0.5 * (left + right)
    }

    /// Index of the last node `≤ t`.
    pub fn index_at_or_before(&self, t: f64) -> usize {
        match self.nodes.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }
}

/// Vector-valued samples on a grid, with optional derivative samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: Arc<Grid>,
    values: Vec<DVector<f64>>,
    derivs: Option<Vec<DVector<f64>>>,
    dim: usize,
}

impl SampledFn {
    pub fn new(grid: Arc<Grid>, values: Vec<DVector<f64>>, derivs: Option<Vec<DVector<f64>>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSampledFn(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidSampledFn("inconsistent or zero dimension".into()));
        }
        if let Some(d) = &derivs {
            if d.len() != values.len() || d.iter().any(|v| v.len() != dim) {
                return Err(Error::InvalidSampledFn("derivative samples do not match values".into()));
            }
        }
        Ok(SampledFn { grid, values, derivs, dim })
    }

    /// Samples `f` (and optionally its derivative `df`) at every node.
    pub fn from_fn(
        grid: Arc<Grid>,
        f: impl Fn(f64) -> DVector<f64>,
        df: Option<&dyn Fn(f64) -> DVector<f64>>,
    ) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        let derivs = df.map(|d| grid.nodes().iter().map(|&t| d(t)).collect());
        SampledFn::new(grid, values, derivs)
    }

    /// Scalar convenience constructor.
    pub fn scalar(grid: Arc<Grid>, f: impl Fn(f64) -> f64, df: Option<&dyn Fn(f64) -> f64>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| DVector::from_element(1, f(t))).collect();
        let derivs = df.map(|d| grid.nodes().iter().map(|&t| DVector::from_element(1, d(t))).collect());
        SampledFn::new(grid, values, derivs)
    }

    pub fn constant(grid: Arc<Grid>, v: DVector<f64>) -> Self {
        let n = grid.len();
        let dim = v.len();
        SampledFn {
            grid,
            values: vec![v; n],
            derivs: Some(vec![DVector::zeros(dim); n]),
            dim,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn derivatives(&self) -> Option<&[DVector<f64>]> {
        self.derivs.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &DVector<f64> {
        &self.values[i]
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// Stored derivative samples, or five-point finite differences.
    pub fn derivative_or_fd(&self) -> Vec<DVector<f64>> {
        if let Some(d) = &self.derivs {
            return d.clone();
        }
        let t = self.times();
        let cols: Vec<Vec<f64>> = (0..self.dim)
            .map(|k| quad::fd_derivative(t, &self.component(k), self.grid.jumps()))
            .collect();
        (0..self.len())
            .map(|i| DVector::from_iterator(self.dim, cols.iter().map(|c| c[i])))
            .collect()
    }

    /// Attaches finite-difference derivative samples when none are stored.
    pub fn with_fd_derivatives(mut self) -> Self {
        if self.derivs.is_none() {
            self.derivs = Some(self.derivative_or_fd());
        }
        self
    }

    pub fn without_derivatives(mut self) -> Self {
        self.derivs = None;
        self
    }

    /// Interpolated value at `t`: cubic Hermite when derivative samples are
    /// stored, linear otherwise. Constant extrapolation outside the grid.
    pub fn value_at(&self, t: f64) -> DVector<f64> {
        let ts = self.times();
        if t <= ts[0] {
            return self.values[0].clone();
        }
        if t >= self.grid.t_max() {
            return self.values[self.len() - 1].clone();
        }
        let i = quad::locate(ts, t);
        let (t0, t1) = (ts[i], ts[i + 1]);
        match &self.derivs {
            Some(d) if !self.grid.jumps().contains(&i) => DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|k| {
                    quad::hermite(t0, t1, self.values[i][k], self.values[i + 1][k], d[i][k], d[i + 1][k], t)
                }),
            ),
            _ => {
                let s = (t - t0) / (t1 - t0);
                &self.values[i] * (1.0 - s) + &self.values[i + 1] * s
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Applies `f` node-wise; derivative samples are dropped.
    pub fn map(&self, f: impl Fn(f64, &DVector<f64>) -> DVector<f64>) -> Result<SampledFn> {
        let values = self.times().iter().zip(&self.values).map(|(&t, v)| f(t, v)).collect();
        SampledFn::new(self.grid.clone(), values, None)
    }

    /// `c · self` (derivatives scaled as well).
    pub fn scaled(&self, c: f64) -> SampledFn {
        SampledFn {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            derivs: self.derivs.as_ref().map(|d| d.iter().map(|v| v * c).collect()),
            dim: self.dim,
        }
    }

    /// Node-wise sum; both operands must share the grid.
    pub fn add(&self, other: &SampledFn) -> Result<SampledFn> {
        if self.grid.nodes() != other.grid.nodes() || self.dim != other.dim {
            return Err(Error::GridMismatch("operands live on different grids".into()));
        }
        let derivs = match (&self.derivs, &other.derivs) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            _ => None,
        };
        SampledFn::new(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            derivs,
        )
    }

    /// Writes `t, v_1..v_n[, dv_1..dv_n]` with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("v_{k}")));
        if self.derivs.is_some() {
            header.extend((1..=self.dim).map(|k| format!("dv_{k}")));
        }
        wr.write_record(&header)?;
        for (i, &t) in self.times().iter().enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            row.extend(self.values[i].iter().map(|v| format!("{v:.16e}")));
            if let Some(d) = &self.derivs {
                row.extend(d[i].iter().map(|v| format!("{v:.16e}")));
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV layout produced by [`SampledFn::write_csv`].
    pub fn read_csv<R: Read>(r: R, tail_tol: f64) -> Result<SampledFn> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(Error::Csv("first column must be 't'".into()));
        }
        let nv = header.iter().filter(|h| h.starts_with("v_")).count();
        let nd = header.iter().filter(|h| h.starts_with("dv_")).count();
        if nv == 0 || (nd != 0 && nd != nv) || header.len() != 1 + nv + nd {
            return Err(Error::Csv("expected columns t, v_1..v_n and optionally dv_1..dv_n".into()));
        }
        for (k, h) in header.iter().enumerate().skip(1) {
            let expect = if k <= nv { format!("v_{k}") } else { format!("dv_{}", k - nv) };
            if *h != expect {
                return Err(Error::Csv(format!("column {k} should be '{expect}', found '{h}'")));
            }
        }
        let mut ts = Vec::new();
        let mut vals = Vec::new();
        let mut ders = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| Error::Csv(format!("row {}: {e}", line + 2)))?;
            if nums.len() != header.len() {
                return Err(Error::Csv(format!("row {} has {} fields", line + 2, nums.len())));
            }
            ts.push(nums[0]);
            vals.push(DVector::from_column_slice(&nums[1..=nv]));
            if nd > 0 {
                ders.push(DVector::from_column_slice(&nums[1 + nv..]));
            }
        }
        let grid = Arc::new(Grid::new(ts, tail_tol)?);
        SampledFn::new(grid, vals, if nd > 0 { Some(ders) } else { None })
    }
}

fn weight_samples(grid: &Grid, nu: &WeightSpec) -> Result<Vec<f64>> {
    grid.nodes()
        .iter()
        .map(|&t| {
            nu.eval(t).map_err(|e| match e {
                Error::GridMismatch(m) => Error::GridMismatch(m),
                other => other,
            })
        })
        .collect()
}

fn lp_integrand(vals: &[DVector<f64>], w: &[f64], p: f64) -> Vec<f64> {
    vals.iter().zip(w).map(|(v, wi)| v.norm().powf(p) * wi).collect()
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("exponent p = {p} must satisfy 1 <= p < inf")))
    }
}

/// `(∫ ‖f‖^p ν)^{1/p}` over the grid.
pub fn weighted_lp_norm(f: &SampledFn, nu: &WeightSpec, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let w = weight_samples(f.grid(), nu)?;
    let y = lp_integrand(f.values(), &w, p);
    let r = quad::richardson_trapezoid(f.times(), &y, f.grid().jumps());
    Ok(r.extrapolated.max(0.0).powf(1.0 / p))
}

/// `‖f‖_{L_p(ν)} + ‖ḟ‖_{L_p(ν)}`.
pub fn weighted_w1p_norm(f: &SampledFn, nu: &WeightSpec, p: f64) -> Result<f64> {
    let d = f.derivatives().ok_or(Error::MissingDerivative)?;
    let df = SampledFn::new(f.grid_arc().clone(), d.to_vec(), None)?;
    Ok(weighted_lp_norm(f, nu, p)? + weighted_lp_norm(&df, nu, p)?)
}

/// Finiteness of `∫ (‖f‖^p + ‖ḟ‖^p) ν` judged on the partial integrals at
/// `T_max/8, T_max/4, T_max/2, T_max`.
pub fn w1p_finiteness(f: &SampledFn, nu: &WeightSpec, p: f64) -> Result<(Settle, f64)> {
    check_exponent(p)?;
    let d = f.derivatives().ok_or(Error::MissingDerivative)?;
    let w = weight_samples(f.grid(), nu)?;
    let y: Vec<f64> = lp_integrand(f.values(), &w, p)
        .iter()
        .zip(lp_integrand(d, &w, p))
        .map(|(a, b)| a + b)
        .collect();
    Ok(doubling_partials(f.grid(), &y))
}

/// Partial integrals of nodal samples `y` at the four dyadic fractions of
/// `T_max`, classified by [`classify_doublings`].
pub fn doubling_partials(grid: &Grid, y: &[f64]) -> (Settle, f64) {
    let c = quad::cumulative(grid.nodes(), y, grid.jumps());
    let tm = grid.t_max();
    let vals: Vec<f64> = [0.125, 0.25, 0.5, 1.0]
        .iter()
        .map(|fr| interp(grid.nodes(), &c, fr * tm))
        .collect();
    classify_doublings(&vals)
}

fn interp(t: &[f64], y: &[f64], x: f64) -> f64 {
    let i = quad::locate(t, x);
    let s = (x - t[i]) / (t[i + 1] - t[i]);
    y[i] + s * (y[i + 1] - y[i])
}

/// Relative level below which tail values are rounding noise.
pub const TAIL_NOISE_RTOL: f64 = 1e-13;

/// Nonnegative series tail verdict on the last 20% of nodes: pass iff the end
/// value is below `tol` and the second half of the tail does not exceed the
/// first; inconclusive if clearly decreasing but still above `tol`. A tail
/// lying entirely below the rounding floor of the series is treated as zero.
pub fn tail_decay(grid: &Grid, series: &[f64], tol: f64) -> (Verdict, f64) {
    let start = grid.tail_start();
    let tail = &series[start..];
    let end = *tail.last().unwrap();
    if tail.iter().any(|v| v.is_nan()) {
        return (Verdict::Inconclusive, end);
    }
    let scale = series.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = TAIL_NOISE_RTOL * scale;
    if end <= tol && tail.iter().all(|v| v.abs() <= floor) {
        return (Verdict::Pass, end);
    }
    let mid = tail.len() / 2;
    let max1 = tail[..mid].iter().cloned().fold(0.0, f64::max);
    let max2 = tail[mid..].iter().cloned().fold(0.0, f64::max);
    if end.is_infinite() || max2.is_infinite() {
        return (Verdict::Fail, end);
    }
    let trending = max2 <= max1 * (1.0 + 1e-12);
    if end <= tol && trending {
        (Verdict::Pass, end)
    } else if max2 < max1 * (1.0 - 1e-3) {
        (Verdict::Inconclusive, end)
    } else {
        (Verdict::Fail, end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayMode {
    /// Exponent p = 2: checks f, ψ, h, g.
    P2,
    /// General exponent: checks ψ and h.
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub name: String,
    pub verdict: Verdict,
    pub value_at_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub entries: Vec<DecayEntry>,
}

impl DecayReport {
    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.verdict)
    }

    pub fn summary(&self) -> Verdict {
        Verdict::combine(self.entries.iter().map(|e| e.verdict))
    }
}

/// Tail checks for f = ‖x‖²ν, ψ = νx, h = ⟨x, y⟩ and g = ‖y‖²ν⁻¹.
pub fn check_decay_lemmas(
    x: &SampledFn,
    y: Option<&SampledFn>,
    nu: &WeightSpec,
    mode: DecayMode,
) -> Result<DecayReport> {
    let grid = x.grid();
    let tol = grid.tail_tol;
    let ln_nu: Vec<f64> = grid.nodes().iter().map(|&t| nu.ln_eval(t)).collect::<Result<_>>()?;
    let mut entries = Vec::new();
    let mut push = |name: &str, series: Vec<f64>| {
        let (verdict, value_at_end) = tail_decay(grid, &series, tol);
        entries.push(DecayEntry { name: name.into(), verdict, value_at_end });
    };
    if mode == DecayMode::P2 {
        push(
            "f",
            x.values().iter().zip(&ln_nu).map(|(v, l)| v.norm_squared() * l.exp()).collect(),
        );
    }
    push("psi", x.values().iter().zip(&ln_nu).map(|(v, l)| v.norm() * l.exp()).collect());
    if let Some(y) = y {
        if y.grid().nodes() != grid.nodes() || y.dim() != x.dim() {
            return Err(Error::GridMismatch("x and y must share grid and dimension".into()));
        }
        push("h", x.values().iter().zip(y.values()).map(|(a, b)| a.dot(b).abs()).collect());
        if mode == DecayMode::P2 {
            push(
                "g",
                y.values().iter().zip(&ln_nu).map(|(v, l)| v.norm_squared() * (-l).exp()).collect(),
            );
        }
    }
    Ok(DecayReport { entries })
}

/// Both sides of `∫‖x‖ω ≤ ‖x‖_{p,ν} (∫ν^{1−q}ω^q)^{1/q}` on the grid.
pub fn holder_sides(
    x: &SampledFn,
    nu: &WeightSpec,
    omega: &DistributionSpec,
    p: f64,
    shells: &quad::ShellConfig,
) -> Result<(f64, f64)> {
    let q = p / (p - 1.0);
    let lhs = if omega.singular_at_zero() {
        let xf = |t: f64| x.value_at(t).norm();
        omega.integrate_against(&xf, x.grid().t_max(), 8 * x.len())
    } else {
        let y: Vec<f64> = x
            .times()
            .iter()
            .zip(x.values())
            .map(|(&t, v)| v.norm() * omega.eval(t))
            .collect();
        quad::richardson_trapezoid(x.times(), &y, x.grid().jumps()).extrapolated
    };
    let (dual, settle) = crate::weights::dual_integral(nu, omega, q, shells);
    if !settle.is_finite() {
        return Err(Error::QuadratureNoConvergence("dual weight integral".into()));
    }
    Ok((lhs, weighted_w1p_norm(x, nu, p)? * dual.powf(1.0 / q)))
}

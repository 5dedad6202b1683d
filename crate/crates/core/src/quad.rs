//! Quadrature, interpolation and finite-difference kernels on nonuniform grids.
//!
//! Grid-based routines take an optional list of *jump cells*: indices `i` such
//! that the data may be discontinuous across `[t_i, t_{i+1}]`. Stencils never
//! straddle a jump cell; the cell itself is integrated by the trapezoid rule.

use serde::{Deserialize, Serialize};

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Eight-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..8 {
        s += GL8_W[k] * f(c + h * GL8_X[k]);
    }
    s * h
}

/// Composite Gauss-Legendre with `pieces` equal subintervals.
pub fn gauss8_composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| gauss8(f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

/// Composite trapezoid rule.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Trapezoid value together with its Richardson-extrapolated companion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub trapezoid: f64,
    pub extrapolated: f64,
    pub error_estimate: f64,
}

/// Trapezoid rule with a Richardson check against the every-other-node rule.
///
/// On each pair of cells the extrapolation reduces to the nonuniform Simpson
/// rule; a trailing unpaired cell uses the quadratic through its two left
/// neighbours. Jump cells are integrated by the trapezoid rule alone.
pub fn richardson_trapezoid(t: &[f64], y: &[f64], jumps: &[usize]) -> RichardsonEstimate {
    let trap = trapezoid(t, y);
    let mut extra = 0.0;
    for (s, e) in segments(t.len(), jumps) {
        extra += simpson_segment(&t[s..=e], &y[s..=e]);
    }
    for &j in jumps {
        if j + 1 < t.len() {
            extra += 0.5 * (t[j + 1] - t[j]) * (y[j] + y[j + 1]);
        }
    }
    RichardsonEstimate {
        trapezoid: trap,
        extrapolated: extra,
        error_estimate: (extra - trap).abs(),
    }
}

fn simpson_segment(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (t[1] - t[0]) * (y[0] + y[1]);
    }
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        let hs = h0 + h1;
        s += hs / 6.0
            * ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        s += interval_integral(&t[i - 1..=i + 1], &y[i - 1..=i + 1], t[i], t[i + 1]);
    }
    s
}

/// Maximal index ranges `[s, e]` not crossing a jump cell.
pub fn segments(n: usize, jumps: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut js: Vec<usize> = jumps.iter().copied().filter(|&j| j + 1 < n).collect();
    js.sort_unstable();
    js.dedup();
    for j in js {
        if j >= start {
            out.push((start, j));
            start = j + 1;
        }
    }
    if start < n {
        out.push((start, n - 1));
    }
    out
}

/// Lagrange basis weights at `x` for interpolation through `nodes`.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let m = nodes.len();
    (0..m)
        .map(|j| {
            let mut w = 1.0;
            for k in 0..m {
                if k != j {
                    w *= (x - nodes[k]) / (nodes[j] - nodes[k]);
                }
            }
            w
        })
        .collect()
}

/// Integral over `[a, b]` of the interpolating polynomial through `(nodes, vals)`
/// (exact for degree ≤ 3 via two-point Gauss; three points used for safety).
pub fn interval_integral(nodes: &[f64], vals: &[f64], a: f64, b: f64) -> f64 {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..3 {
        let w = lagrange_weights(nodes, c + h * X[k]);
        let v: f64 = w.iter().zip(vals).map(|(a, b)| a * b).sum();
        s += W[k] * v;
    }
    s * h
}

fn cubic_stencil(i: usize, s: usize, e: usize) -> (usize, usize) {
    // Four nodes around cell [i, i+1] clipped to segment [s, e].
    let len = e - s + 1;
    let width = len.min(4);
    let mut lo = i.saturating_sub(1).max(s);
    if lo + width - 1 > e {
        lo = e + 1 - width;
    }
    (lo, lo + width - 1)
}

/// Cumulative integral `C_i = ∫_{t_0}^{t_i} y` with piecewise-cubic accuracy.
pub fn cumulative(t: &[f64], y: &[f64], jumps: &[usize]) -> Vec<f64> {
    let cell = cell_integrals(t, y, jumps);
    let mut c = vec![0.0; t.len()];
    for i in 1..t.len() {
        c[i] = c[i - 1] + cell[i - 1];
    }
    c
}

/// Per-cell integrals `∫_{t_i}^{t_{i+1}} y`, trapezoidal across jump cells.
fn cell_integrals(t: &[f64], y: &[f64], jumps: &[usize]) -> Vec<f64> {
    let n = t.len();
    let mut cell = vec![0.0; n.saturating_sub(1)];
    for (s, e) in segments(n, jumps) {
        for i in s..e {
            let (lo, hi) = cubic_stencil(i, s, e);
            cell[i] = interval_integral(&t[lo..=hi], &y[lo..=hi], t[i], t[i + 1]);
        }
    }
    for &j in jumps {
        if j + 1 < n {
            cell[j] = 0.5 * (t[j + 1] - t[j]) * (y[j] + y[j + 1]);
        }
    }
    cell
}

/// Reverse cumulative integral `R_i = ∫_{t_i}^{t_N} y`, summed from the end
/// so that small tails keep their relative accuracy.
pub fn cumulative_from_end(t: &[f64], y: &[f64], jumps: &[usize]) -> Vec<f64> {
    let cell = cell_integrals(t, y, jumps);
    let mut r = vec![0.0; t.len()];
    for i in (0..cell.len()).rev() {
        r[i] = r[i + 1] + cell[i];
    }
    r
}

/// Finite-difference weights (Fornberg) for derivative `order` at `x0`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let m = order;
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Five-point finite-difference derivative on a nonuniform grid.
pub fn fd_derivative(t: &[f64], y: &[f64], jumps: &[usize]) -> Vec<f64> {
    let n = t.len();
    let mut d = vec![0.0; n];
    for (s, e) in segments(n, jumps) {
        let len = e - s + 1;
        if len == 1 {
            continue;
        }
        let width = len.min(5);
        for i in s..=e {
            let mut lo = i.saturating_sub(2).max(s);
            if lo + width - 1 > e {
                lo = e + 1 - width;
            }
            let w = fornberg_weights(t[i], &t[lo..lo + width], 1);
            d[i] = w.iter().zip(&y[lo..lo + width]).map(|(a, b)| a * b).sum();
        }
    }
    d
}

/// Index `i` with `t[i] ≤ x ≤ t[i+1]`, clamped to the valid cell range.
pub fn locate(t: &[f64], x: f64) -> usize {
    let n = t.len();
    if x <= t[0] {
        return 0;
    }
    if x >= t[n - 1] {
        return n - 2;
    }
    match t.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Cubic Hermite interpolation on one cell.
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = t1 - t0;
    let s = (x - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// How a sequence of partial integrals over doubling endpoints behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Settle {
    /// Three successive doublings changed the value by less than the relative tolerance.
    Plateau,
    /// Increments shrink geometrically; the value is extrapolated.
    Geometric,
    /// Increments do not shrink, or the integrand overflowed.
    Diverged,
    /// Neither settling nor divergence could be established.
    Unsettled,
}

impl Settle {
    pub fn is_finite(self) -> bool {
        matches!(self, Settle::Plateau | Settle::Geometric)
    }
}

/// Relative change allowed per doubling for a plateau.
pub const PLATEAU_RTOL: f64 = 1e-8;
/// Largest increment ratio accepted as geometric convergence.
pub const GEOMETRIC_RATIO: f64 = 0.9;

/// Classifies partial values `values[k]` taken at doubling endpoints.
/// Returns the verdict and the (possibly extrapolated) limit.
pub fn classify_doublings(values: &[f64]) -> (Settle, f64) {
    let n = values.len();
    let last = *values.last().unwrap_or(&0.0);
    if values.iter().any(|v| v.is_infinite()) {
        return (Settle::Diverged, last);
    }
    if values.iter().any(|v| v.is_nan()) || n < 2 {
        return (Settle::Unsettled, last);
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = last.abs();
    let m = inc.len();
    if m >= 3 && inc[m - 3..].iter().all(|d| d.abs() <= PLATEAU_RTOL * scale) {
        return (Settle::Plateau, last);
    }
    if m >= 3 {
        let a = inc[m - 3].abs();
        let b = inc[m - 2].abs();
        let c = inc[m - 1].abs();
        let same_sign = inc[m - 3..].iter().all(|d| d.signum() == inc[m - 1].signum());
        if same_sign && c >= b && b >= a && c > 0.0 {
            return (Settle::Diverged, last);
        }
        if b > 0.0 && a > 0.0 && c / b <= GEOMETRIC_RATIO && b / a <= GEOMETRIC_RATIO {
            let r = c / b;
            return (Settle::Geometric, last + inc[m - 1] * r / (1.0 - r));
        }
    } else if m >= 1 && inc.iter().all(|d| d.abs() <= PLATEAU_RTOL * scale) {
        return (Settle::Plateau, last);
    }
    (Settle::Unsettled, last)
}

/// Result of an improper integral evaluated on dyadic shells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improper {
    pub value: f64,
    pub settle: Settle,
    /// Last shell endpoint visited (upper end for tails, lower end towards 0).
    pub reached: f64,
    pub shells: usize,
}

/// Shell configuration for improper integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    /// Subintervals per shell, each integrated with 8-point Gauss-Legendre.
    pub pieces: usize,
    /// Maximum number of shells.
    pub max_shells: usize,
    /// Divergence is only declared beyond t = min_span (tails) or below
    /// t = 1/min_span (towards 0).
    pub min_span: f64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        ShellConfig {
            pieces: 16,
            max_shells: 400,
            min_span: 256.0,
        }
    }
}

fn shell_loop(
    mut shell: impl FnMut(usize) -> (f64, f64),
    may_diverge: impl Fn(f64) -> bool,
    cfg: &ShellConfig,
) -> Improper {
    let mut sum = 0.0;
    let mut incs: Vec<f64> = Vec::new();
    let mut calm = 0;
    let mut reached = 0.0;
    for j in 0..cfg.max_shells {
        let (inc, edge) = shell(j);
        reached = edge;
        if inc.is_nan() {
            return Improper { value: f64::NAN, settle: Settle::Unsettled, reached, shells: j + 1 };
        }
        if inc.is_infinite() {
            return Improper { value: inc, settle: Settle::Diverged, reached, shells: j + 1 };
        }
        sum += inc;
        incs.push(inc);
        if inc.abs() <= PLATEAU_RTOL * sum.abs() {
            calm += 1;
        } else {
            calm = 0;
        }
        if calm >= 3 {
            return Improper { value: sum, settle: Settle::Plateau, reached, shells: j + 1 };
        }
        let m = incs.len();
        if may_diverge(edge) && m >= 3 {
            let (a, b, c) = (incs[m - 3], incs[m - 2], incs[m - 1]);
            let same = a.signum() == c.signum() && b.signum() == c.signum();
            if same && c.abs() >= b.abs() && b.abs() >= a.abs() && c != 0.0 {
                return Improper { value: sum, settle: Settle::Diverged, reached, shells: m };
            }
        }
    }
    let m = incs.len();
    if m >= 3 {
        let (a, b, c) = (incs[m - 3].abs(), incs[m - 2].abs(), incs[m - 1].abs());
        if a > 0.0 && b > 0.0 && c / b <= GEOMETRIC_RATIO && b / a <= GEOMETRIC_RATIO {
            let r = c / b;
            return Improper {
                value: sum + incs[m - 1] * r / (1.0 - r),
                settle: Settle::Geometric,
                reached,
                shells: m,
            };
        }
    }
    Improper { value: sum, settle: Settle::Unsettled, reached, shells: m }
}

/// `∫_start^∞ f` on shells `[start·2^j, start·2^{j+1}]`, `start > 0`.
pub fn integrate_to_infinity(f: &dyn Fn(f64) -> f64, start: f64, cfg: &ShellConfig) -> Improper {
    shell_loop(
        |j| {
            let a = start * (j as f64).exp2();
            let b = 2.0 * a;
            (gauss8_composite(f, a, b, cfg.pieces), b)
        },
        |edge| edge >= cfg.min_span,
        cfg,
    )
}

/// `∫_0^top f` on shells `[top·2^{-j-1}, top·2^{-j}]`; handles integrable
/// power singularities at 0 and sharp peaks at 0.
pub fn integrate_to_zero(f: &dyn Fn(f64) -> f64, top: f64, cfg: &ShellConfig) -> Improper {
    shell_loop(
        |j| {
            let b = top * (-(j as f64)).exp2();
            let a = 0.5 * b;
            (gauss8_composite(f, a, b, cfg.pieces), a)
        },
        |edge| edge <= 1.0 / cfg.min_span,
        cfg,
    )
}

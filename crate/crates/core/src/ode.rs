//! Fixed-step classical Runge-Kutta integration along a time grid.

use crate::error::{Error, Result};
use std::ops::{Add, Mul};

/// Values whose norm exceeds this are treated as a blow-up.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Default number of RK4 substeps per grid cell.
pub const DEFAULT_SUBSTEPS: usize = 4;

/// Integrates `y' = rhs(t, y)` over the nodes `t` (forward when `t` increases,
/// backward when it decreases), taking `substeps` RK4 steps per cell.
/// Returns the state at every node.
pub fn rk4_along<T, F, N>(t: &[f64], y0: T, rhs: F, norm: N, substeps: usize) -> Result<Vec<T>>
where
    T: Clone + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64, &T) -> T,
    N: Fn(&T) -> f64,
{
    let mut out = Vec::with_capacity(t.len());
    let mut y = y0;
    out.push(y.clone());
    let m = substeps.max(1);
    for w in t.windows(2) {
        let h = (w[1] - w[0]) / m as f64;
        let mut s = w[0];
        for _ in 0..m {
            y = rk4_step(&rhs, s, &y, h);
            s += h;
        }
        let nrm = norm(&y);
        if !nrm.is_finite() || nrm > OVERFLOW_GUARD {
            return Err(Error::IntegrationBlowup { t: w[1] });
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn rk4_step<T, F>(rhs: &F, t: f64, y: &T, h: f64) -> T
where
    T: Clone + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64, &T) -> T,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &(y.clone() + k1.clone() * (0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(y.clone() + k2.clone() * (0.5 * h)));
    let k4 = rhs(t + h, &(y.clone() + k3.clone() * h));
    y.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

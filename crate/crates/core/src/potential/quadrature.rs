//! Double-exponential (exp-sinh) quadrature on `[0, ∞)`.
//!
//! `u = exp((π/2) sinh t)` maps the half line onto `t ∈ ℝ`; the transformed
//! integrand decays double-exponentially for integrands that are bounded at
//! 0 and decay at least like `u^{-1-a}`. The trapezoidal rule on
//! `[-T_MAX, T_MAX]` is refined by halving the step, reusing old nodes.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const T_MAX: f64 = 5.0;
const MIN_LEVEL: usize = 3;
pub const MAX_LEVEL: usize = 12;

/// Integrates a vector-valued function. `f(u, out)` must write the integrand
/// components at `u` into `out`. Converged when every component changes by
/// at most `tol` between consecutive levels.
pub fn integrate_half_line_vec<F>(width: usize, tol: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut buf = vec![0.0; width];
    let mut node_sum = vec![0.0; width];
    let mut add_node = |t: f64, sum: &mut [f64], buf: &mut [f64]| {
        let s = FRAC_PI_2 * t.sinh();
        let u = s.exp();
        let w = u * FRAC_PI_2 * t.cosh();
        if u == 0.0 || !w.is_finite() {
            return;
        }
        f(u, buf);
        for (acc, v) in sum.iter_mut().zip(buf.iter()) {
            let c = v * w;
            if c.is_finite() {
                *acc += c;
            }
        }
    };

    // Level 0: step 1.
    let n0 = T_MAX as i64;
    for k in -n0..=n0 {
        add_node(k as f64, &mut node_sum, &mut buf);
    }
    let mut prev: Vec<f64> = node_sum.clone();
    let mut h = 1.0;
    let mut last_change = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let count = (T_MAX / h) as i64;
        let mut k = -count + 1;
        if k.rem_euclid(2) == 0 {
            k += 1;
        }
        while k <= count {
            add_node(k as f64 * h, &mut node_sum, &mut buf);
            k += 2;
        }
        let cur: Vec<f64> = node_sum.iter().map(|s| s * h).collect();
        last_change = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if level >= MIN_LEVEL && last_change <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature { tol, levels: MAX_LEVEL, last_change })
}

pub fn integrate_half_line<F>(tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let v = integrate_half_line_vec(1, tol, |u, out| out[0] = f(u))?;
    Ok(v[0])
}

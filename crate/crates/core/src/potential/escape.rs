//! Escape probability from the unit hypercube `{0,1}^d`.

use serde::{Deserialize, Serialize};

use super::bessel::scaled_i0_i1;
use super::quadrature::integrate_half_line;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeResult {
    pub dim: usize,
    /// `P_0[τ⁺_H = ∞]` for `H = {0,1}^d`.
    pub p_esc: f64,
    /// `Σ_{x ∈ H} G(0,x)`.
    pub green_sum: f64,
}

/// By symmetry `e_H` is uniform, so `p_esc · Σ_{x∈H} G(0,x) = 1`, and
/// `Σ_{x∈H} G(0,x) = d ∫₀^∞ (e^{-v}(I_0(v) + I_1(v)))^d dv`.
pub fn escape_probability_hypercube(d: usize, tol: f64) -> Result<EscapeResult> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("escape probability needs d >= 3, got {d}")));
    }
    let di = d as i32;
    let integral = integrate_half_line(tol / d as f64, |v| {
        let (a, b) = scaled_i0_i1(v);
        (a + b).powi(di)
    })?;
    let green_sum = d as f64 * integral;
    Ok(EscapeResult { dim: d, p_esc: 1.0 / green_sum, green_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::green::green_many;

    #[test]
    fn matches_direct_green_sum_in_d3() {
        let r = escape_probability_hypercube(3, 1e-11).unwrap();
        let pts: Vec<Vec<i32>> = (0..8u32).map(|m| (0..3).map(|k| ((m >> k) & 1) as i32).collect()).collect();
        let direct: f64 = green_many(&pts, 3, 1e-12).unwrap().iter().sum();
        assert!((r.green_sum - direct).abs() < 1e-9, "{} vs {direct}", r.green_sum);
        assert!((r.p_esc * r.green_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn increases_with_dimension() {
        let p: Vec<f64> = (3..=16).map(|d| escape_probability_hypercube(d, 1e-10).unwrap().p_esc).collect();
        assert!(p[13] > p[0]);
        assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        assert!(escape_probability_hypercube(2, 1e-10).is_err());
    }
}

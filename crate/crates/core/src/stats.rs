//! Estimates, confidence intervals and compensated sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = NeumaierSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// A Monte Carlo estimate of a proportion or a mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEstimate {
    pub trials: u64,
    /// Success count for proportions, `None` for means.
    pub successes: Option<u64>,
    pub estimate: f64,
    /// Standard error of `estimate`.
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Declared systematic bias bound (0 when exact).
    pub bias: f64,
}

impl ExperimentEstimate {
    pub fn proportion(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        if successes > trials {
            return Err(Error::Consistency(format!("{successes} successes out of {trials} trials")));
        }
        let p = successes as f64 / trials as f64;
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        Ok(ExperimentEstimate {
            trials,
            successes: Some(successes),
            estimate: p,
            std_err: (p * (1.0 - p) / trials as f64).sqrt(),
            ci_low: lo,
            ci_high: hi,
            bias: 0.0,
        })
    }

    /// Sample mean with a normal 95% interval. Values are summed in order.
    pub fn mean(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        let n = values.len() as f64;
        let m = neumaier_sum(values.iter().copied()) / n;
        let var =
            if values.len() > 1 { neumaier_sum(values.iter().map(|v| (v - m) * (v - m))) / (n - 1.0) } else { 0.0 };
        let se = (var / n).sqrt();
        Ok(ExperimentEstimate {
            trials: values.len() as u64,
            successes: None,
            estimate: m,
            std_err: se,
            ci_low: m - Z95 * se,
            ci_high: m + Z95 * se,
            bias: 0.0,
        })
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        // 0.5 of 100 at z = 1.96: center 0.5, half width 0.096...
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403832).abs() < 1e-5, "{lo}");
        assert!((hi - 0.596168).abs() < 1e-5, "{hi}");
        assert_eq!(wilson_interval(0, 10, Z95).0, 0.0);
        assert_eq!(wilson_interval(10, 10, Z95).1, 1.0);
    }

    #[test]
    fn neumaier_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn mean_estimate() {
        let e = ExperimentEstimate::mean(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.estimate, 2.0);
        assert!((e.std_err - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(ExperimentEstimate::mean(&[]).is_err());
        assert!(ExperimentEstimate::proportion(0, 0).is_err());
    }

    proptest! {
        #[test]
        fn wilson_contains_point(n in 1u64..5000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
        }
    }
}

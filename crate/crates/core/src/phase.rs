//! Crossing-probability grids over `(u₁, u₂)` and empirical phase-curve
//! bisection for `𝒦` and `𝒱`. Outputs are finite-size proxies.

use serde::{Deserialize, Serialize};

use crate::clusters::crossing_event;
use crate::error::{Error, Result};
use crate::interlace::{sample_interlacement, ForwardPolicy, SampleOptions, WindowKernel};
use crate::report::{fmt_f64, CsvTable};
use crate::rng::{derive_seed, try_par_trials};
use crate::stats::ExperimentEstimate;

pub const CURVE_LABEL: &str = "empirical finite-size curve";
pub const CSV_HEADER: [&str; 9] = ["u1", "u2", "selector", "L", "trials", "estimate", "ci_low", "ci_high", "seed"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selector {
    K,
    V,
}

impl Selector {
    pub fn as_str(self) -> &'static str {
        match self {
            Selector::K => "K",
            Selector::V => "V",
        }
    }

    fn code(self) -> u64 {
        match self {
            Selector::K => 0,
            Selector::V => 1,
        }
    }
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" | "k" => Ok(Selector::K),
            "V" | "v" => Ok(Selector::V),
            _ => Err(Error::InvalidArgument(format!("selector must be K or V, got {s:?}"))),
        }
    }
}

/// A window kernel sized for crossings at scale `L` (radius `2L`).
pub struct PhaseEngine {
    kernel: WindowKernel,
    l: u32,
}

impl PhaseEngine {
    pub fn new(dim: usize, l: u32, tol: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument("L must be positive".into()));
        }
        Ok(PhaseEngine { kernel: WindowKernel::new(dim, 2 * l, ForwardPolicy::Exact, tol)?, l })
    }

    pub fn from_kernel(kernel: WindowKernel, l: u32) -> Result<Self> {
        if kernel.spec().radius < 2 * l {
            return Err(Error::Geometry(format!("window radius {} below 2L = {}", kernel.spec().radius, 2 * l)));
        }
        Ok(PhaseEngine { kernel, l })
    }

    pub fn kernel(&self) -> &WindowKernel {
        &self.kernel
    }

    pub fn scale(&self) -> u32 {
        self.l
    }

    /// Crossing frequency over `trials` fresh pairs, trial `i` on stream `i`
    /// of `seed`.
    pub fn estimate_cell(
        &self,
        u1: f64,
        u2: f64,
        selector: Selector,
        trials: usize,
        seed: u64,
    ) -> Result<ExperimentEstimate> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        let ix = self.kernel.indexer();
        let hits = try_par_trials(seed, trials, |_, rng| {
            let s1 = sample_interlacement(&self.kernel, u1, rng, SampleOptions::default())?;
            let s2 = sample_interlacement(&self.kernel, u2, rng, SampleOptions::default())?;
            let mut occ = s1.occupancy.and(&s2.occupancy)?;
            if selector == Selector::V {
                occ = occ.not();
            }
            crossing_event(&occ, ix, self.l)
        })?;
        ExperimentEstimate::proportion(hits.iter().filter(|h| **h).count() as u64, trials as u64)
    }

    /// Seed of the cell at `(u₁, u₂)`: keyed by the values, so repeated
    /// parameters reproduce exactly.
    pub fn cell_seed(seed: u64, u1: f64, u2: f64, selector: Selector) -> u64 {
        derive_seed(seed, &[u1.to_bits(), u2.to_bits(), selector.code()])
    }

    pub fn scan_grid(&self, spec: &PhaseGridSpec, selector: Selector) -> Result<Vec<CellEstimate>> {
        spec.validate()?;
        let mut out = Vec::with_capacity(spec.u1.len() * spec.u2.len());
        for &u1 in &spec.u1 {
            for &u2 in &spec.u2 {
                let seed = Self::cell_seed(spec.seed, u1, u2, selector);
                let estimate = self.estimate_cell(u1, u2, selector, spec.trials, seed)?;
                out.push(CellEstimate { u1, u2, selector, l: self.l, seed, estimate });
            }
        }
        Ok(out)
    }

    /// Bracket for `u₂*(u₁)`, where the crossing probability passes `p*`.
    pub fn curve_bisect(&self, u1: f64, selector: Selector, opts: &BisectOptions) -> Result<PhaseCurveEstimate> {
        opts.validate()?;
        let mut probes: Vec<Probe> = Vec::new();
        let mut probe = |u2: f64| -> Result<bool> {
            let seed = Self::cell_seed(opts.seed, u1, u2, selector);
            let e = self.estimate_cell(u1, u2, selector, opts.trials, seed)?;
            // "above": on the low-u₂ side of the transition
            let above = match selector {
                Selector::V => e.estimate > opts.p_star,
                Selector::K => e.estimate < opts.p_star,
            };
            probes.push(Probe { u2, estimate: e.estimate, ci_low: e.ci_low, ci_high: e.ci_high });
            Ok(above)
        };
        let mut result = PhaseCurveEstimate {
            label: CURVE_LABEL.into(),
            u1,
            selector,
            p_star: opts.p_star,
            status: CurveStatus::Bracketed,
            bracket: None,
            resolved: false,
            trials: opts.trials,
            probes: Vec::new(),
        };
        if !probe(0.0)? {
            result.status = CurveStatus::BoundaryLow;
            result.bracket = Some([0.0, 0.0]);
            result.probes = probes;
            return Ok(result);
        }
        let mut lo = 0.0;
        let mut hi = opts.start;
        let mut found = false;
        for _ in 0..=opts.max_doublings {
            if probe(hi)? {
                lo = hi;
                hi *= 2.0;
            } else {
                found = true;
                break;
            }
        }
        if !found {
            result.status = CurveStatus::NoCrossingInRange;
            result.probes = probes;
            return Ok(result);
        }
        while hi - lo > opts.tolerance {
            let mid = 0.5 * (lo + hi);
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let at = |u: f64| probes.iter().rev().find(|p| p.u2 == u).cloned();
        let (plo, phi) = (at(lo), at(hi));
        result.resolved = matches!((plo, phi), (Some(a), Some(b))
            if !(a.ci_low <= opts.p_star && opts.p_star <= a.ci_high)
                && !(b.ci_low <= opts.p_star && opts.p_star <= b.ci_high));
        result.bracket = Some([lo, hi]);
        result.probes = probes;
        Ok(result)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridSpec {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl PhaseGridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("u1", &self.u1), ("u2", &self.u2)] {
            if v.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} grid is empty")));
            }
            if v.iter().any(|u| !(*u >= 0.0) || !u.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} values must be finite and >= 0")));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub u1: f64,
    pub u2: f64,
    pub selector: Selector,
    #[serde(rename = "L")]
    pub l: u32,
    pub seed: u64,
    pub estimate: ExperimentEstimate,
}

pub fn cells_to_csv(cells: &[CellEstimate]) -> CsvTable {
    let mut t = CsvTable::new(&CSV_HEADER);
    for c in cells {
        t.push(vec![
            fmt_f64(c.u1),
            fmt_f64(c.u2),
            c.selector.as_str().into(),
            c.l.to_string(),
            c.estimate.trials.to_string(),
            fmt_f64(c.estimate.estimate),
            fmt_f64(c.estimate.ci_low),
            fmt_f64(c.estimate.ci_high),
            c.seed.to_string(),
        ]);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectOptions {
    pub p_star: f64,
    /// Stop when the bracket is at most this wide in `u₂`.
    pub tolerance: f64,
    pub trials: usize,
    pub seed: u64,
    /// First upper probe.
    pub start: f64,
    pub max_doublings: u32,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions { p_star: 0.5, tolerance: 0.05, trials: 200, seed: 0, start: 1.0, max_doublings: 5 }
    }
}

impl BisectOptions {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_star) {
            return Err(Error::InvalidArgument(format!("p* = {} outside [0,1]", self.p_star)));
        }
        if !(self.tolerance > 0.0) || !(self.start > 0.0) || self.trials == 0 {
            return Err(Error::InvalidArgument("tolerance, start and trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStatus {
    Bracketed,
    /// The transition lies above every level reached by doubling.
    NoCrossingInRange,
    /// Already at `u₂ = 0` the estimate is on the far side of `p*`.
    BoundaryLow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub u2: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurveEstimate {
    pub label: String,
    pub u1: f64,
    pub selector: Selector,
    pub p_star: f64,
    pub status: CurveStatus,
    pub bracket: Option<[f64; 2]>,
    /// Both bracket ends have confidence intervals excluding `p*`.
    pub resolved: bool,
    pub trials: usize,
    pub probes: Vec<Probe>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> PhaseEngine {
        PhaseEngine::new(3, 2, 1e-10).unwrap()
    }

    #[test]
    fn trivial_endpoints() {
        let e = engine();
        let k = e.estimate_cell(0.0, 3.0, Selector::K, 20, 1).unwrap();
        assert_eq!(k.estimate, 0.0);
        let v = e.estimate_cell(0.0, 0.0, Selector::V, 20, 1).unwrap();
        assert_eq!(v.estimate, 1.0);
        assert!(e.estimate_cell(1.0, 1.0, Selector::V, 0, 1).is_err());
    }

    #[test]
    fn grid_rows_reproduce() {
        let e = engine();
        let spec = PhaseGridSpec { u1: vec![1.0, 1.0], u2: vec![0.5, 2.0], trials: 30, seed: 7 };
        let cells = e.scan_grid(&spec, Selector::V).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0], cells[2]);
        assert_eq!(cells[1], cells[3]);
        let one = PhaseGridSpec { u1: vec![1.0], u2: vec![0.5], trials: 30, seed: 7 };
        assert_eq!(e.scan_grid(&one, Selector::V).unwrap()[0], cells[0]);
        let csv = cells_to_csv(&cells).render();
        assert!(csv.starts_with("u1,u2,selector,L,trials,estimate,ci_low,ci_high,seed\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn curve_edge_cases() {
        let e = engine();
        let opts = BisectOptions { trials: 20, max_doublings: 2, ..Default::default() };
        let k = e.curve_bisect(0.0, Selector::K, &opts).unwrap();
        assert_eq!(k.status, CurveStatus::NoCrossingInRange);
        assert_eq!(k.bracket, None);
        let one = BisectOptions { p_star: 1.0, ..opts.clone() };
        let v = e.curve_bisect(1.0, Selector::V, &one).unwrap();
        assert_eq!(v.status, CurveStatus::BoundaryLow);
        assert_eq!(v.bracket.unwrap()[0], 0.0);
    }

    #[test]
    fn curve_brackets() {
        let e = engine();
        let opts = BisectOptions { p_star: 0.9, trials: 100, tolerance: 0.25, seed: 3, ..Default::default() };
        let c = e.curve_bisect(3.0, Selector::V, &opts).unwrap();
        assert_eq!(c.status, CurveStatus::Bracketed, "{:?}", c.probes);
        let [lo, hi] = c.bracket.unwrap();
        assert!(hi - lo <= 0.25 && lo < hi);
        assert_eq!(c.label, CURVE_LABEL);
    }
}

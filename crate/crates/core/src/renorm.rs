//! Scales `Lₙ = L₀ l₀ⁿ`, hierarchical events, the decoupling error and
//! right-hand side, and trigger certificates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::clusters::{crossing_event_at, one_arm_path};
use crate::error::{Error, Result};
use crate::lattice::{BoxIndexer, Point};
use crate::stats::{wilson_interval, Z95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenormScheme {
    #[serde(rename = "L0")]
    pub base: u32,
    pub l0: u32,
}

impl RenormScheme {
    pub fn new(base: u32, l0: u32) -> Result<Self> {
        if base == 0 {
            return Err(Error::InvalidArgument("L0 must be positive".into()));
        }
        if l0 < 2 {
            return Err(Error::InvalidArgument(format!("l0 = {l0} must be at least 2")));
        }
        Ok(RenormScheme { base, l0 })
    }

    /// `Lₙ`, or an error on overflow.
    pub fn scale(&self, n: u32) -> Result<i64> {
        (self.l0 as i64)
            .checked_pow(n)
            .and_then(|p| p.checked_mul(self.base as i64))
            .filter(|v| *v <= i32::MAX as i64)
            .ok_or_else(|| Error::InvalidArgument(format!("L_{n} overflows")))
    }

    /// `Λ_{x,n} = (Lₙ₋₁ ℤ^d) ∩ B(x, Lₙ)` for `n >= 1`, lexicographic.
    pub fn lambda(&self, x: &Point, n: u32) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::InvalidArgument("Λ is defined for n >= 1".into()));
        }
        let step = self.scale(n - 1)?;
        let radius = self.scale(n)?;
        let ranges: Vec<(i64, i64)> = x
            .coords()
            .iter()
            .map(|&c| {
                let c = c as i64;
                (
                    (c - radius).div_euclid(step) + i64::from((c - radius).rem_euclid(step) != 0),
                    (c + radius).div_euclid(step),
                )
            })
            .collect();
        let d = x.dim();
        let mut out = Vec::new();
        let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.1 < r.0) {
            return Ok(out);
        }
        loop {
            out.push(Point::new(k.iter().map(|v| (v * step) as i32).collect()));
            let mut j = d;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                k[j] += 1;
                if k[j] <= ranges[j].1 {
                    break;
                }
                k[j] = ranges[j].0;
            }
        }
    }
}

/// `ε(u, L₀, l₀) = 2e^{-t} / (1 - e^{-t})`, `t = u L₀^{d-2} l₀^{(d-2)/2}`.
pub fn epsilon_error(u: f64, base: u32, l0: u32, d: usize) -> Result<f64> {
    let t = u * (base as f64).powi(d as i32 - 2) * (l0 as f64).powf((d as f64 - 2.0) / 2.0);
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("ε exponent t = {t} must be positive and finite")));
    }
    Ok(2.0 * (-t).exp() / -(-t).exp_m1())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside [0,1]")));
    }
    Ok(())
}

/// `ln[(2l₀+1)^{d 2^{n+1}} (p + ε₁ + ε₂)^{2ⁿ}]`, as `2ⁿ` times the `n = 0`
/// value (scaling by a power of two is exact).
pub fn decoupling_log_rhs(p: f64, n: u32, l0: u32, eps1: f64, eps2: f64, d: usize) -> Result<f64> {
    check_unit("p", p)?;
    check_unit("ε₁", eps1)?;
    check_unit("ε₂", eps2)?;
    let base = 2.0 * d as f64 * (2.0 * l0 as f64 + 1.0).ln() + (p + eps1 + eps2).ln();
    if n > 1000 {
        return Err(Error::InvalidArgument(format!("level n = {n} too large")));
    }
    Ok(ldexp(base, n as i32))
}

fn ldexp(x: f64, e: i32) -> f64 {
    x * 2f64.powi(e)
}

/// `(2l₀+1)^{d 2^{n+1}} (p + ε₁ + ε₂)^{2ⁿ}`; may under- or overflow to
/// `0` or `∞`, use [`decoupling_log_rhs`] for the exact exponent.
pub fn decoupling_rhs(p: f64, n: u32, l0: u32, eps1: f64, eps2: f64, d: usize) -> Result<f64> {
    Ok(decoupling_log_rhs(p, n, l0, eps1, eps2, d)?.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    pub n: u32,
    /// `log₂` of the decoupling right-hand side.
    pub log2_rhs: f64,
    /// `log₂ 2^{-2ⁿ} = -2ⁿ`.
    pub log2_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerReport {
    pub p_upper: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub l0: u32,
    pub d: usize,
    /// `(2l₀+1)^{2d}`.
    pub factor: f64,
    pub lhs: f64,
    pub verdict: Verdict,
    /// Confidence level of `p_upper` when it came from counts.
    pub confidence: Option<f64>,
    pub assumption: String,
    /// Filled on PASS, one entry per level `0..=levels`.
    pub bounds: Vec<LevelBound>,
}

const ASSUMPTION: &str = "valid conditional on l0 >= A(d, eps), a constant that is not quantified";

pub fn trigger_certificate(
    p_upper: f64,
    l0: u32,
    eps1: f64,
    eps2: f64,
    d: usize,
    levels: u32,
) -> Result<TriggerReport> {
    check_unit("p_upper", p_upper)?;
    check_unit("ε₁", eps1)?;
    check_unit("ε₂", eps2)?;
    let factor = (2.0 * l0 as f64 + 1.0).powi(2 * d as i32);
    let lhs = factor * (p_upper + eps1 + eps2);
    let verdict = if lhs < 0.5 { Verdict::Pass } else { Verdict::Fail };
    let mut bounds = Vec::new();
    if verdict == Verdict::Pass {
        for n in 0..=levels {
            let log2_rhs = decoupling_log_rhs(p_upper, n, l0, eps1, eps2, d)? / std::f64::consts::LN_2;
            let log2_bound = -ldexp(1.0, n as i32);
            if !(log2_rhs <= log2_bound) {
                return Err(Error::Consistency(format!("rhs above 2^(-2^{n}) on a passing certificate")));
            }
            bounds.push(LevelBound { n, log2_rhs, log2_bound });
        }
    }
    Ok(TriggerReport {
        p_upper,
        eps1,
        eps2,
        l0,
        d,
        factor,
        lhs,
        verdict,
        confidence: None,
        assumption: ASSUMPTION.into(),
        bounds,
    })
}

/// Certificate with `p̂_upper` the Wilson 95% upper limit of the counts.
pub fn trigger_from_counts(
    successes: u64,
    trials: u64,
    l0: u32,
    eps1: f64,
    eps2: f64,
    d: usize,
    levels: u32,
) -> Result<TriggerReport> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidArgument(format!("{successes} successes in {trials} trials")));
    }
    let (_, hi) = wilson_interval(successes, trials, Z95);
    let mut r = trigger_certificate(hi, l0, eps1, eps2, d, levels)?;
    r.confidence = Some(0.95);
    Ok(r)
}

/// Memoized evaluation of the hierarchical events `G_{x,n}`.
pub struct Hierarchy<'a> {
    scheme: RenormScheme,
    seed: Box<dyn FnMut(&Point) -> Result<bool> + 'a>,
    memo: HashMap<(Point, u32), bool>,
}

impl<'a> Hierarchy<'a> {
    pub fn new(scheme: RenormScheme, seed: impl FnMut(&Point) -> Result<bool> + 'a) -> Self {
        Hierarchy { scheme, seed: Box::new(seed), memo: HashMap::new() }
    }

    /// `n = 0`: the seed at `x`. `n >= 1`: some `x₁, x₂ ∈ Λ_{x,n}` with
    /// `100 |x₁ - x₂|∞ > Lₙ` and both level `n - 1` events true.
    pub fn event(&mut self, x: &Point, n: u32) -> Result<bool> {
        if let Some(v) = self.memo.get(&(x.clone(), n)) {
            return Ok(*v);
        }
        let v = if n == 0 {
            (self.seed)(x)?
        } else {
            let ln = self.scheme.scale(n)?;
            let d = x.dim();
            let mut lo = vec![i64::MAX; d];
            let mut hi = vec![i64::MIN; d];
            for y in self.scheme.lambda(x, n)? {
                if self.event(&y, n - 1)? {
                    for k in 0..d {
                        lo[k] = lo[k].min(y.coords()[k] as i64);
                        hi[k] = hi[k].max(y.coords()[k] as i64);
                    }
                }
            }
            // the largest ℓ∞ distance between true points is the largest
            // coordinate extent
            (0..d).any(|k| hi[k] >= lo[k] && 100 * (hi[k] - lo[k]) > ln)
        };
        self.memo.insert((x.clone(), n), v);
        Ok(v)
    }
}

pub fn hierarchical_event(
    seed: impl FnMut(&Point) -> Result<bool>,
    x: &Point,
    n: u32,
    scheme: RenormScheme,
) -> Result<bool> {
    Hierarchy::new(scheme, seed).event(x, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCheck {
    /// `0 ↔ ∂ᵢB(0, 2Lₙ)` in the occupancy.
    pub connected: bool,
    pub hierarchical: bool,
    pub holds: bool,
    /// The connecting path when the implication fails.
    pub witness: Option<Vec<Point>>,
}

/// Checks `0 ↔ ∂ᵢB(0,2Lₙ) ⇒ G_{0,n}` on `occ`, the seed at `y` being
/// `B(y,L₀) ↔ ∂ᵢB(y,2L₀)`.
pub fn path_implies_hierarchical(occ: &Bitset, ix: &BoxIndexer, n: u32, scheme: RenormScheme) -> Result<PathCheck> {
    let outer = scheme.scale(n)? * 2;
    if (ix.radius() as i64) < outer {
        return Err(Error::Geometry(format!("window radius {} below 2L_{n} = {outer}", ix.radius())));
    }
    let path = one_arm_path(occ, ix, outer as u32)?;
    let connected = path.is_some();
    let base = scheme.base;
    let hierarchical =
        hierarchical_event(|y| crossing_event_at(occ, ix, y.coords(), base), &Point::origin(ix.dim()), n, scheme)?;
    let holds = !connected || hierarchical;
    let witness = if holds { None } else { path.map(|p| p.into_iter().map(|i| ix.point_of(i)).collect()) };
    Ok(PathCheck { connected, hierarchical, holds, witness })
}

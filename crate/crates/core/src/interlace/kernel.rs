//! Potential-theoretic data of a window box `K = B(0,N)`: equilibrium
//! measure, start distribution and, for exact re-entry, the harmonic
//! measure of `K` seen from every point just outside it.

use faer::Mat;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxIndexer, LatticeBox, Point};
use crate::potential::{capacity::capacity_from_system, BoundarySystem, CapacityResult, DenseGreen, GreenTable};

/// How the forward side is followed after leaving the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForwardPolicy {
    /// On each exit, return with probability `P_x[H_K < ∞]` and re-enter
    /// at a point drawn from the harmonic measure `H_K(x, ·)`. No bias.
    Exact,
    /// Walk until leaving `B(0,R)`; returns after that are ignored.
    KillRadius(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub dim: usize,
    /// Window `B(0,N)`.
    pub radius: u32,
    pub policy: ForwardPolicy,
    /// Declared per-trajectory truncation bias `δ`.
    pub bias: f64,
}

impl WindowSpec {
    pub fn len(&self) -> usize {
        (2 * self.radius as usize + 1).pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn same_window(&self, other: &WindowSpec) -> bool {
        self.dim == other.dim && self.radius == other.radius
    }
}

pub const MAX_KILL_BIAS: f64 = 0.01;

/// Harmonic measure from one outer representative.
struct ReentryRow {
    /// `P_x[H_K < ∞]`.
    hit: f64,
    target: WeightedIndex<f64>,
}

pub struct WindowKernel {
    spec: WindowSpec,
    indexer: BoxIndexer,
    capacity: CapacityResult,
    /// Inner-boundary points in equilibrium order and their site indices.
    boundary_sites: Vec<usize>,
    start_law: WeightedIndex<f64>,
    reentry: Vec<ReentryRow>,
    /// Representatives: ascending absolute coordinates, last equal to N+1.
    reps: Vec<Vec<i32>>,
}

fn rep_index(reps: &[Vec<i32>], key: &[i32]) -> usize {
    reps.binary_search_by(|r| r.as_slice().cmp(key)).expect("outer representative")
}

fn outer_reps(dim: usize, n: i32) -> Vec<Vec<i32>> {
    fn rec(dim: usize, n: i32, lo: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == dim - 1 {
            let mut r = cur.clone();
            r.push(n + 1);
            out.push(r);
            return;
        }
        for v in lo..=n {
            cur.push(v);
            rec(dim, n, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, n, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

impl WindowKernel {
    /// Builds the kernel for `B(0, radius)` in dimension `dim`.
    pub fn new(dim: usize, radius: u32, policy: ForwardPolicy, tol: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!("interlacements need d >= 3, got {dim}")));
        }
        if dim > 32 {
            return Err(Error::Guard(format!("window dimension {dim} exceeds 32")));
        }
        if radius == 0 {
            return Err(Error::InvalidArgument("window radius must be positive".into()));
        }
        let table = GreenTable::ball(dim, 2 * radius + 1, tol)?;
        let dense = table.to_dense(2 * radius + 1);
        Self::with_greens(dim, radius, policy, &dense, tol)
    }

    /// As [`WindowKernel::new`] with a precomputed Green lookup covering
    /// `|z|∞ <= 2N+1`.
    pub fn with_greens(dim: usize, radius: u32, policy: ForwardPolicy, dense: &DenseGreen, tol: f64) -> Result<Self> {
        if !(3..=32).contains(&dim) || dense.dim() != dim {
            return Err(Error::InvalidArgument(format!("unsupported window dimension {dim}")));
        }
        let n = radius as i32;
        let boundary = LatticeBox::centered(dim, radius).inner_boundary();
        let sys =
            BoundarySystem::new(boundary, |z| dense.get_checked(z), crate::potential::capacity::SOLVE_RESIDUAL_TOL)?;
        let window = LatticeBox::centered(dim, radius).points();
        let capacity = capacity_from_system(window, &sys)?;
        let indexer = BoxIndexer::new(dim, radius);
        let boundary_sites: Vec<usize> = sys.points().iter().map(|p| indexer.index_unchecked(p.coords())).collect();
        let start_law = WeightedIndex::new(sys.equilibrium().iter().map(|e| e.max(0.0)))
            .map_err(|e| Error::Consistency(format!("equilibrium measure: {e}")))?;

        let (bias, reps, reentry) = match policy {
            ForwardPolicy::Exact => {
                let reps = outer_reps(dim, n);
                let m = sys.len();
                let rhs = Mat::<f64>::from_fn(m, reps.len(), |i, j| {
                    let y = sys.points()[i].coords();
                    let mut diff = [0i32; 32];
                    for k in 0..dim {
                        diff[k] = y[k] - reps[j][k];
                    }
                    dense.get(&diff[..dim])
                });
                if (0..reps.len()).any(|j| (0..m).any(|i| rhs[(i, j)].is_nan())) {
                    return Err(Error::GreenCoverage(vec![2 * n + 1]));
                }
                let h = sys.solve(&rhs);
                let mut rows = Vec::with_capacity(reps.len());
                for j in 0..reps.len() {
                    let mut w = Vec::with_capacity(m);
                    let mut total = 0.0;
                    for i in 0..m {
                        let v = h[(i, j)];
                        if v < -1e-9 {
                            return Err(Error::Consistency(format!(
                                "negative harmonic measure {v:e} from {:?}",
                                reps[j]
                            )));
                        }
                        let v = v.max(0.0);
                        total += v;
                        w.push(v);
                    }
                    if !(total > 0.0 && total <= 1.0 + 1e-9) {
                        return Err(Error::Consistency(format!("hitting probability {total} from {:?}", reps[j])));
                    }
                    let target =
                        WeightedIndex::new(w).map_err(|e| Error::Consistency(format!("harmonic measure: {e}")))?;
                    rows.push(ReentryRow { hit: total.min(1.0), target });
                }
                (0.0, reps, rows)
            }
            ForwardPolicy::KillRadius(r) => {
                if r < 4 * radius {
                    return Err(Error::Guard(format!("kill radius {r} below 4N = {}", 4 * radius)));
                }
                let far = Point::new({
                    let mut c = vec![0; dim];
                    c[0] = (r + 1 - radius) as i32;
                    c
                });
                let delta = capacity.capacity * crate::potential::green(&far, dim, tol)?;
                if delta > MAX_KILL_BIAS {
                    return Err(Error::Guard(format!(
                        "kill radius {r} gives declared bias {delta:.3e} > {MAX_KILL_BIAS}"
                    )));
                }
                (delta, Vec::new(), Vec::new())
            }
        };
        Ok(WindowKernel {
            spec: WindowSpec { dim, radius, policy, bias },
            indexer,
            capacity,
            boundary_sites,
            start_law,
            reentry,
            reps,
        })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn indexer(&self) -> &BoxIndexer {
        &self.indexer
    }

    pub fn capacity(&self) -> &CapacityResult {
        &self.capacity
    }

    /// Draws a start site from `e_K / cap(K)`.
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.boundary_sites[self.start_law.sample(rng)]
    }

    /// For an outer point `x` (one coordinate `±(N+1)`, the rest in
    /// `[-N, N]`): returns `None` if the walk escapes, or the re-entry site.
    pub fn reenter<R: Rng + ?Sized>(&self, x: &[i32], rng: &mut R) -> Option<usize> {
        let d = self.spec.dim;
        let mut order = [0usize; 32];
        let order = &mut order[..d];
        for (k, o) in order.iter_mut().enumerate() {
            *o = k;
        }
        order.sort_by_key(|&k| (x[k].abs(), k));
        let mut key = [0i32; 32];
        for k in 0..d {
            key[k] = x[order[k]].abs();
        }
        let row = &self.reentry[rep_index(&self.reps, &key[..d])];
        if !rng.random_bool(row.hit) {
            return None;
        }
        let y = self.boundary_sites[row.target.sample(rng)];
        let mut yc = [0i32; 32];
        self.indexer.coords_of(y, &mut yc[..d]);
        let mut out = [0i32; 32];
        for k in 0..d {
            let i = order[k];
            let s = if x[i] < 0 { -1 } else { 1 };
            out[i] = s * yc[k];
        }
        Some(self.indexer.index_unchecked(&out[..d]))
    }

    /// `P_x[H_K < ∞]` for an outer point (exact policy only).
    pub fn outer_hit_probability(&self, x: &[i32]) -> Option<f64> {
        if self.reentry.is_empty() {
            return None;
        }
        let mut key: Vec<i32> = x.iter().map(|v| v.abs()).collect();
        key.sort_unstable();
        Some(self.reentry[rep_index(&self.reps, &key)].hit)
    }

    /// Harmonic measure row for an outer point, as `(site, mass)` pairs.
    pub fn harmonic_measure(&self, x: &[i32]) -> Option<Vec<(usize, f64)>> {
        let d = self.spec.dim;
        if self.reentry.is_empty() {
            return None;
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by_key(|&k| (x[k].abs(), k));
        let key: Vec<i32> = order.iter().map(|&k| x[k].abs()).collect();
        let row = &self.reentry[rep_index(&self.reps, &key)];
        let total: f64 = row.target.weights().sum();
        let mut yc = vec![0i32; d];
        let mut out = Vec::new();
        for (i, w) in row.target.weights().enumerate() {
            self.indexer.coords_of(self.boundary_sites[i], &mut yc);
            let mut z = vec![0i32; d];
            for k in 0..d {
                let j = order[k];
                z[j] = if x[j] < 0 { -yc[k] } else { yc[k] };
            }
            out.push((self.indexer.index_unchecked(&z), w / total * row.hit));
        }
        Some(out)
    }
}

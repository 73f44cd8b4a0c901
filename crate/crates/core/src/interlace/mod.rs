//! Finite-window sampler for the interlacement set `ℐ^u`.
//!
//! The anchor set is the window itself, `K = B(0,N)`. The number of
//! trajectories hitting `K` is `Poisson(u cap(K))`, each enters at a point
//! drawn from `e_K / cap(K)`, its forward half is a simple random walk and
//! its backward half a walk conditioned never to return to `K`. Because the
//! backward half never comes back, its trace in the window is its start.

pub mod container;
pub mod kernel;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::lattice::Point;
use crate::potential::CapacityResult;
use crate::rng::try_par_trials;
use crate::stats::ExperimentEstimate;
use crate::walk::StepSource;

pub use kernel::{ForwardPolicy, WindowKernel, WindowSpec};

pub const REJECTION_BUDGET: usize = 10_000;
const MAX_POISSON_MEAN: f64 = 1e8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleOptions {
    /// Keep per-trajectory visit and edge lists.
    pub record_trajectories: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// On the inner boundary of the window.
    pub start: Point,
    /// Forward visits inside the window, in time order, start first.
    pub forward: Vec<Point>,
    /// Backward visits inside the window (only the start: the backward half
    /// never returns to the window).
    pub backward: Vec<Point>,
    /// Edges with both endpoints in the window, in traversal order.
    pub edges: Vec<(Point, Point)>,
    /// Backward-side proposals rejected before acceptance.
    pub rejections: u32,
}

/// Set of nearest-neighbor edges of the window. Edge `{a, a + e_k}` is slot
/// `a·d + k` where `a` is the site index of the lower endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    dim: usize,
    bits: Bitset,
}

impl EdgeSet {
    pub fn new(dim: usize, sites: usize) -> Self {
        EdgeSet { dim, bits: Bitset::new(sites * dim) }
    }

    pub fn full(indexer: &crate::lattice::BoxIndexer) -> Self {
        let mut e = EdgeSet::new(indexer.dim(), indexer.len());
        let mut c = vec![0i32; indexer.dim()];
        for a in 0..indexer.len() {
            indexer.coords_of(a, &mut c);
            for k in 0..indexer.dim() {
                if c[k] < indexer.radius() as i32 {
                    e.bits.set(a * indexer.dim() + k);
                }
            }
        }
        e
    }

    #[inline]
    pub fn insert(&mut self, lower: usize, axis: usize) {
        self.bits.set(lower * self.dim + axis);
    }

    #[inline]
    pub fn contains(&self, lower: usize, axis: usize) -> bool {
        self.bits.get(lower * self.dim + axis)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    /// `(lower, axis)` pairs in slot order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.iter_ones().map(move |s| (s / self.dim, s % self.dim))
    }

    pub fn union_with(&mut self, other: &EdgeSet) -> Result<()> {
        self.bits.or_assign(&other.bits)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterlacementSample {
    pub u: f64,
    pub window: WindowSpec,
    pub n_k: u64,
    pub trajectories: Vec<TrajectoryRecord>,
    pub occupancy: Bitset,
    pub edges: EdgeSet,
}

impl InterlacementSample {
    pub fn empty(window: WindowSpec, u: f64) -> Self {
        let len = window.len();
        let dim = window.dim;
        InterlacementSample {
            u,
            window,
            n_k: 0,
            trajectories: Vec::new(),
            occupancy: Bitset::new(len),
            edges: EdgeSet::new(dim, len),
        }
    }
}

struct Recorder<'a> {
    kernel: &'a WindowKernel,
    rec: Option<TrajectoryRecord>,
}

impl Recorder<'_> {
    fn point(&self, site: usize) -> Point {
        self.kernel.indexer().point_of(site)
    }
}

/// Draws one sample of `ℐ^u ∩ B(0,N)`.
pub fn sample_interlacement<R: Rng + ?Sized>(
    kernel: &WindowKernel,
    u: f64,
    rng: &mut R,
    opts: SampleOptions,
) -> Result<InterlacementSample> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("level u must be finite and >= 0, got {u}")));
    }
    let mut sample = InterlacementSample::empty(kernel.spec().clone(), u);
    if u == 0.0 {
        return Ok(sample);
    }
    let mean = u * kernel.capacity().capacity;
    if mean > MAX_POISSON_MEAN {
        return Err(Error::Guard(format!("Poisson mean {mean:e} exceeds {MAX_POISSON_MEAN:e}")));
    }
    let n_k =
        Poisson::new(mean).map_err(|e| Error::InvalidArgument(format!("Poisson mean {mean}: {e}")))?.sample(rng) as u64;
    sample.n_k = n_k;
    let mut src = StepSource::new(kernel.spec().dim);
    for _ in 0..n_k {
        let start = kernel.sample_start(rng);
        let mut recorder = Recorder { kernel, rec: None };
        if opts.record_trajectories {
            let p = recorder.point(start);
            recorder.rec = Some(TrajectoryRecord {
                start: p.clone(),
                forward: Vec::new(),
                backward: vec![p],
                edges: Vec::new(),
                rejections: 0,
            });
        }
        let rejections = backward_side(kernel, start, &mut src, rng)?;
        forward_side(kernel, start, &mut src, rng, &mut sample, &mut recorder);
        if let Some(mut r) = recorder.rec {
            r.rejections = rejections;
            sample.trajectories.push(r);
        }
    }
    Ok(sample)
}

/// Proposes backward halves from `start` until one never returns to `K`;
/// returns the number of rejected proposals.
fn backward_side<R: Rng + ?Sized>(
    kernel: &WindowKernel,
    start: usize,
    src: &mut StepSource,
    rng: &mut R,
) -> Result<u32> {
    let d = kernel.spec().dim;
    let n = kernel.spec().radius as i32;
    let mut base = [0i32; 32];
    kernel.indexer().coords_of(start, &mut base[..d]);
    for attempt in 0..REJECTION_BUDGET {
        let mut c = base;
        let axis = crate::walk::apply_step(&mut c[..d], src.next(rng));
        if c[axis].abs() <= n {
            continue;
        }
        let escaped = match kernel.spec().policy {
            ForwardPolicy::Exact => {
                let h = kernel.outer_hit_probability(&c[..d]).expect("exact kernel");
                !rng.random_bool(h)
            }
            ForwardPolicy::KillRadius(r) => walk_outside(&mut c[..d], n, r as i32, src, rng).is_none(),
        };
        if escaped {
            return Ok(attempt as u32);
        }
    }
    Err(Error::RejectionBudget { budget: REJECTION_BUDGET, start: base[..d].to_vec() })
}

/// Walks from a point outside the window until it re-enters (returns the
/// entry coordinates in `c`) or leaves `B(0,kill)`.
fn walk_outside<R: Rng + ?Sized>(c: &mut [i32], n: i32, kill: i32, src: &mut StepSource, rng: &mut R) -> Option<()> {
    loop {
        let axis = crate::walk::apply_step(c, src.next(rng));
        if c[axis].abs() > kill {
            return None;
        }
        if c.iter().all(|v| v.abs() <= n) {
            return Some(());
        }
    }
}

fn forward_side<R: Rng + ?Sized>(
    kernel: &WindowKernel,
    start: usize,
    src: &mut StepSource,
    rng: &mut R,
    sample: &mut InterlacementSample,
    recorder: &mut Recorder<'_>,
) {
    let spec = kernel.spec();
    let d = spec.dim;
    let n = spec.radius as i32;
    let ix = kernel.indexer();
    let strides: Vec<usize> = ix.strides().to_vec();
    let mut c = [0i32; 32];
    ix.coords_of(start, &mut c[..d]);
    let mut site = start;
    sample.occupancy.set(site);
    if let Some(r) = recorder.rec.as_mut() {
        r.forward.push(ix.point_of(site));
    }
    loop {
        let dir = src.next(rng);
        let axis = crate::walk::apply_step(&mut c[..d], dir);
        if c[axis].abs() > n {
            let entry = match spec.policy {
                ForwardPolicy::Exact => kernel.reenter(&c[..d], rng),
                ForwardPolicy::KillRadius(r) => {
                    walk_outside(&mut c[..d], n, r as i32, src, rng).map(|_| ix.index_unchecked(&c[..d]))
                }
            };
            match entry {
                None => return,
                Some(y) => {
                    site = y;
                    ix.coords_of(site, &mut c[..d]);
                    sample.occupancy.set(site);
                    if let Some(r) = recorder.rec.as_mut() {
                        r.forward.push(ix.point_of(site));
                    }
                }
            }
        } else {
            let prev = site;
            site = if dir & 1 == 0 { site + strides[axis] } else { site - strides[axis] };
            sample.edges.insert(prev.min(site), axis);
            sample.occupancy.set(site);
            if let Some(r) = recorder.rec.as_mut() {
                let (a, b) = (ix.point_of(prev), ix.point_of(site));
                r.forward.push(b.clone());
                r.edges.push((a, b));
            }
        }
    }
}

/// Independent samples on streams `0..count` of `seed`.
pub fn sample_many(
    kernel: &WindowKernel,
    u: f64,
    count: usize,
    seed: u64,
    opts: SampleOptions,
) -> Result<Vec<InterlacementSample>> {
    try_par_trials(seed, count, |_, rng| sample_interlacement(kernel, u, rng, opts))
}

/// Union of occupancies; all samples must share one window.
pub fn merge_occupancy(samples: &[&InterlacementSample]) -> Result<Bitset> {
    let Some(first) = samples.first() else {
        return Ok(Bitset::new(0));
    };
    let mut out = first.occupancy.clone();
    for s in &samples[1..] {
        if !s.window.same_window(&first.window) {
            return Err(Error::WindowMismatch(format!(
                "windows (d={}, N={}) and (d={}, N={})",
                first.window.dim, first.window.radius, s.window.dim, s.window.radius
            )));
        }
        out.or_assign(&s.occupancy)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VacuumReport {
    pub u: f64,
    pub estimate: ExperimentEstimate,
    /// `e^{-u cap(A)}`.
    pub reference: f64,
    /// `u cap(K) δ`: expected number of trajectories times the declared
    /// per-trajectory bias.
    pub bias_budget: f64,
}

impl VacuumReport {
    /// `|p̂ - reference| <= 3 SE + bias budget`.
    pub fn consistent(&self) -> bool {
        (self.estimate.estimate - self.reference).abs() <= 3.0 * self.estimate.std_err + self.bias_budget
    }
}

/// Monte Carlo estimate of `P[ℐ^u ∩ A = ∅]`.
pub fn vacuum_probability_test(
    kernel: &WindowKernel,
    u: f64,
    a: &[Point],
    trials: usize,
    seed: u64,
    cap_a: &CapacityResult,
) -> Result<VacuumReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("A must be nonempty".into()));
    }
    let n = kernel.spec().radius as i32;
    let ra = a.iter().map(|p| p.linf_norm()).max().unwrap_or(0);
    if n < 2 * ra + 2 {
        return Err(Error::Geometry(format!("window radius {n} below 2·{ra}+2")));
    }
    let sites: Vec<usize> = a
        .iter()
        .map(|p| {
            kernel.indexer().index_of(p.coords()).ok_or_else(|| Error::Geometry(format!("{p:?} outside the window")))
        })
        .collect::<Result<_>>()?;
    let empty = try_par_trials(seed, trials, |_, rng| {
        let s = sample_interlacement(kernel, u, rng, SampleOptions::default())?;
        Ok::<bool, Error>(sites.iter().all(|&i| !s.occupancy.get(i)))
    })?;
    let hits = empty.iter().filter(|e| **e).count() as u64;
    let bias_budget = u * kernel.capacity().capacity * kernel.spec().bias;
    Ok(VacuumReport {
        u,
        estimate: ExperimentEstimate::proportion(hits, trials as u64)?.with_bias(bias_budget),
        reference: (-u * cap_a.capacity).exp(),
        bias_budget,
    })
}

/// Frequency with which a backward proposal from `start` is accepted at the
/// first attempt; its expectation is `e_K(start)`.
pub fn backward_acceptance(
    kernel: &WindowKernel,
    start: &Point,
    trials: usize,
    seed: u64,
) -> Result<ExperimentEstimate> {
    let site = kernel
        .indexer()
        .index_of(start.coords())
        .ok_or_else(|| Error::Geometry(format!("{start:?} outside the window")))?;
    let outcomes = try_par_trials(seed, trials, |_, rng| {
        let mut src = StepSource::new(kernel.spec().dim);
        Ok::<bool, Error>(backward_side(kernel, site, &mut src, rng)? == 0)
    })?;
    ExperimentEstimate::proportion(outcomes.iter().filter(|o| **o).count() as u64, trials as u64)
}

//! Simple random walks and the `d = 3` / `d = 5` path experiments.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::distr::Distribution;
use rand::{Rng, RngCore};
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_disc, BoxIndexer, DiscSpec, LatticeBox, Point};
use crate::potential::{DenseGreen, GreenTable};
use crate::rng::par_trials_init;
use crate::stats::ExperimentEstimate;

/// Uniform nearest-neighbor steps, several per random word.
///
/// Each step consumes `b = ceil(log2(2d))` bits; chunks `>= 2d` are
/// rejected, so every step is exactly uniform.
pub struct StepSource {
    dirs: u32,
    bits: u32,
    mask: u64,
    word: u64,
    left: u32,
}

impl StepSource {
    pub fn new(dim: usize) -> Self {
        let dirs = 2 * dim as u32;
        let bits = 32 - (dirs - 1).leading_zeros();
        StepSource { dirs, bits, mask: (1u64 << bits) - 1, word: 0, left: 0 }
    }

    /// Direction in `0..2d`: axis `dir / 2`, sign `+` when `dir` is even.
    #[inline]
    pub fn next<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> usize {
        loop {
            if self.left < self.bits {
                self.word = rng.next_u64();
                self.left = 64;
            }
            let c = (self.word & self.mask) as u32;
            self.word >>= self.bits;
            self.left -= self.bits;
            if c < self.dirs {
                return c as usize;
            }
        }
    }
}

#[inline]
pub fn apply_step(coords: &mut [i32], dir: usize) -> usize {
    let axis = dir >> 1;
    coords[axis] += if dir & 1 == 0 { 1 } else { -1 };
    axis
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stop {
    /// Stop at the first point outside `B(0, R)`.
    ExitRadius(u32),
    /// Stop after exactly `n` steps.
    StepBudget(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ExitedRadius(u32),
    StepBudget,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Point,
    pub steps: Vec<Point>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn simulate_walk<R: RngCore + ?Sized>(start: &Point, stop: Stop, rng: &mut R) -> Trajectory {
    let d = start.dim();
    let mut src = StepSource::new(d);
    let mut c = start.coords().to_vec();
    let mut steps = vec![start.clone()];
    match stop {
        Stop::ExitRadius(r) => {
            let r = r as i32;
            let mut inside = c.iter().all(|v| v.abs() <= r);
            while inside {
                let axis = apply_step(&mut c, src.next(rng));
                steps.push(Point::new(c.clone()));
                inside = c[axis].abs() <= r;
            }
            Trajectory { start: start.clone(), steps, termination: Termination::ExitedRadius(r as u32) }
        }
        Stop::StepBudget(n) => {
            steps.reserve(n as usize);
            for _ in 0..n {
                apply_step(&mut c, src.next(rng));
                steps.push(Point::new(c.clone()));
            }
            Trajectory { start: start.clone(), steps, termination: Termination::StepBudget }
        }
    }
}

/// Times `n <= len - 1 - guard` with `X[0,n] ∩ X(n, end] = ∅`.
///
/// `n` fails iff some site has first visit `<= n` and last visit `> n`, so
/// the failing times are a union of intervals `[first, last)`.
pub fn cut_times(path: &[Point], guard: usize) -> Vec<usize> {
    if path.is_empty() || guard >= path.len() {
        return Vec::new();
    }
    let mut span: HashMap<&[i32], (usize, usize)> = HashMap::with_capacity(path.len());
    for (t, p) in path.iter().enumerate() {
        span.entry(p.coords()).and_modify(|s| s.1 = t).or_insert((t, t));
    }
    cut_times_from_spans(span.values().copied(), path.len(), guard)
}

fn cut_times_from_spans<I: Iterator<Item = (usize, usize)>>(spans: I, len: usize, guard: usize) -> Vec<usize> {
    let mut diff = vec![0i64; len + 1];
    for (f, l) in spans {
        if l > f {
            diff[f] += 1;
            diff[l] -= 1;
        }
    }
    let last = len - 1 - guard;
    let mut out = Vec::new();
    let mut cover = 0i64;
    for (n, d) in diff.iter().enumerate().take(last + 1) {
        cover += d;
        if cover == 0 {
            out.push(n);
        }
    }
    out
}

/// Cut-time density of walks from the origin with horizon `T` steps.
/// Returns the mean over walks of `#cut times / #eligible times`.
pub fn cut_time_density(
    dim: usize,
    horizon: usize,
    guard: usize,
    walks: usize,
    seed: u64,
) -> Result<ExperimentEstimate> {
    if walks == 0 {
        return Err(Error::InvalidArgument("walks must be positive".into()));
    }
    if guard > horizon {
        return Err(Error::InvalidArgument("guard exceeds the horizon".into()));
    }
    let eligible = horizon - guard + 1;
    let fractions = par_trials_init(seed, walks, HashMap::<Vec<i32>, (usize, usize)>::new, |span, _, rng| {
        span.clear();
        let mut src = StepSource::new(dim);
        let mut c = vec![0i32; dim];
        span.insert(c.clone(), (0, 0));
        for t in 1..=horizon {
            apply_step(&mut c, src.next(rng));
            match span.get_mut(&c) {
                Some(s) => s.1 = t,
                None => {
                    span.insert(c.clone(), (t, t));
                }
            }
        }
        let cuts = cut_times_from_spans(span.values().copied(), horizon + 1, guard);
        cuts.len() as f64 / eligible as f64
    });
    ExperimentEstimate::mean(&fractions)
}

/// Mean first exit time `ξ_m` from `B(0,m)` started at the origin.
pub fn mean_exit_time(dim: usize, m: u32, walks: usize, seed: u64) -> Result<ExperimentEstimate> {
    if walks == 0 {
        return Err(Error::InvalidArgument("walks must be positive".into()));
    }
    let times = par_trials_init(
        seed,
        walks,
        || (),
        |_, _, rng| {
            let mut src = StepSource::new(dim);
            let mut c = vec![0i32; dim];
            let r = m as i32;
            let mut n = 0u64;
            loop {
                n += 1;
                let axis = apply_step(&mut c, src.next(rng));
                if c[axis].abs() > r {
                    return n as f64;
                }
            }
        },
    );
    ExperimentEstimate::mean(&times)
}

/// Exit law of a 3-d walk from the center of `B(0,r)`: the first point at
/// distance `r+1`, computed by propagating mass until less than `1e-17`
/// remains inside.
struct CubeExit {
    radius: i32,
    offsets: Vec<[i32; 3]>,
    #[cfg(test)]
    weights: Vec<f64>,
    table: WeightedAliasIndex<f64>,
}

impl CubeExit {
    fn new(r: i32) -> Self {
        let h = r + 1;
        let w = (2 * h + 1) as usize;
        let idx = |c: [i32; 3]| ((c[0] + h) as usize * w + (c[1] + h) as usize) * w + (c[2] + h) as usize;
        let inside: Vec<usize> =
            (-r..=r).flat_map(|a| (-r..=r).flat_map(move |b| (-r..=r).map(move |c| [a, b, c]))).map(idx).collect();
        let strides = [w * w, w, 1];
        let mut mass = vec![0.0f64; w * w * w];
        let mut next = mass.clone();
        let mut exit = mass.clone();
        mass[idx([0, 0, 0])] = 1.0;
        let mut left = 1.0;
        while left > 1e-17 {
            for &i in &inside {
                let share = mass[i] / 6.0;
                if share == 0.0 {
                    continue;
                }
                for s in strides {
                    next[i + s] += share;
                    next[i - s] += share;
                }
            }
            left = 0.0;
            for &i in &inside {
                left += next[i];
                mass[i] = next[i];
                next[i] = 0.0;
            }
            for (e, n) in exit.iter_mut().zip(next.iter_mut()) {
                *e += *n;
                *n = 0.0;
            }
        }
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for a in -h..=h {
            for b in -h..=h {
                for c in -h..=h {
                    let v = exit[idx([a, b, c])];
                    if v > 0.0 {
                        offsets.push([a, b, c]);
                        weights.push(v);
                    }
                }
            }
        }
        let table = WeightedAliasIndex::new(weights.clone()).expect("positive exit weights");
        CubeExit {
            radius: r,
            offsets,
            #[cfg(test)]
            weights,
            table,
        }
    }
}

const JUMP_RADII: [i32; 4] = [2, 4, 8, 16];

fn cube_exits() -> &'static [CubeExit] {
    static EXITS: OnceLock<Vec<CubeExit>> = OnceLock::new();
    EXITS.get_or_init(|| JUMP_RADII.iter().map(|&r| CubeExit::new(r)).collect())
}

/// 3-d walk from `start` until it first leaves `B(0, kill)`; `visit` sees
/// every position (start included) that can lie in the target set.
///
/// `clearance(x)` must return some `r` such that `B(x, r)` misses the target.
/// Whenever `B(x, r)` also stays inside `B(0, kill)` for a tabulated radius,
/// the walk jumps to its exit point from that cube in one draw.
#[inline]
fn run_until_exit<R: RngCore + ?Sized, C: Fn(&[i32; 3]) -> i32, F: FnMut(&[i32])>(
    start: &[i32],
    kill: i32,
    clearance: C,
    src: &mut StepSource,
    rng: &mut R,
    mut visit: F,
) {
    let exits = cube_exits();
    let mut c = [0i32; 3];
    c.copy_from_slice(start);
    visit(&c);
    loop {
        let norm = c[0].abs().max(c[1].abs()).max(c[2].abs());
        let room = clearance(&c).min(kill - norm);
        match exits.iter().rev().find(|e| e.radius <= room) {
            Some(e) => {
                let o = e.offsets[e.table.sample(rng)];
                for k in 0..3 {
                    c[k] += o[k];
                }
            }
            None => {
                apply_step(&mut c, src.next(rng));
            }
        }
        if c[0].abs().max(c[1].abs()).max(c[2].abs()) > kill {
            return;
        }
        visit(&c);
    }
}

/// `ℓ∞` clearance from the sphere `∂ᵢB(0, m)`.
fn shell_clearance(c: &[i32; 3], m: i32) -> i32 {
    let n = c[0].abs().max(c[1].abs()).max(c[2].abs());
    if n > m {
        n - m - 1
    } else {
        m - 1 - n
    }
}

/// `ℓ∞` clearance from the square `[0,hi]² × {0}`.
fn quarter_clearance(c: &[i32; 3], hi: i32) -> i32 {
    let off = |v: i32| {
        if v < 0 {
            -v
        } else if v > hi {
            v - hi
        } else {
            0
        }
    };
    off(c[0]).max(off(c[1])).max(c[2].abs()) - 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusReport {
    pub m: u32,
    pub kill_radius: u32,
    pub estimate: ExperimentEstimate,
    /// Mean of `R_M = Σ_{i,j} 1{X¹_i = X²_j ∈ ∂ᵢB(0,M)}`.
    pub r_m_mean: f64,
    pub seed: u64,
}

/// Upper bound on the probability that a walk leaving `B(0, kill)` ever
/// returns to `B(0, r)`: `cap(B(0,r)) · max G`, with the capacity scaled
/// linearly from an exactly solved smaller box.
pub fn return_bias_bound(r: u32, kill: u32, tol: f64) -> Result<f64> {
    if kill <= r {
        return Err(Error::InvalidArgument("kill radius must exceed the target radius".into()));
    }
    let r0 = r.min(6);
    let mut t = GreenTable::new(3, tol)?;
    let cap0 = crate::potential::capacity_auto(&LatticeBox::centered(3, r0).points(), &mut t)?.capacity;
    let cap = cap0 * (2 * r + 1) as f64 / (2 * r0 + 1) as f64;
    let g = crate::potential::green(&Point::new(vec![(kill + 1 - r) as i32, 0, 0]), 3, tol)?;
    Ok((cap * g).min(1.0))
}

/// Two independent walks from uniform points of `∂ᵢB(0,2M)`, killed on
/// leaving `B(0,kill)`: estimates `P[X¹ ∩ X² ∩ ∂ᵢB(0,M) ≠ ∅]`.
pub fn annulus_intersection_estimate(
    m: u32,
    kill_radius: Option<u32>,
    trials: usize,
    seed: u64,
) -> Result<AnnulusReport> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("M must be at least 2, got {m}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let kill = kill_radius.unwrap_or(m * 32);
    if kill < 2 * m {
        return Err(Error::InvalidArgument("kill radius must be at least 2M".into()));
    }
    let starts = LatticeBox::centered(3, 2 * m).inner_boundary();
    let ix = BoxIndexer::new(3, m);
    let mi = m as i32;
    let results = par_trials_init(
        seed,
        trials,
        || (vec![0u32; ix.len()], Vec::<usize>::new()),
        |(counts, touched), _, rng| {
            let mut src = StepSource::new(3);
            let s1 = starts[rng.random_range(0..starts.len())].coords().to_vec();
            let s2 = starts[rng.random_range(0..starts.len())].coords().to_vec();
            run_until_exit(
                &s1,
                kill as i32,
                |c| shell_clearance(c, mi),
                &mut src,
                rng,
                |c| {
                    if c[0].abs().max(c[1].abs()).max(c[2].abs()) == mi {
                        let i = ix.index_unchecked(c);
                        if counts[i] == 0 {
                            touched.push(i);
                        }
                        counts[i] += 1;
                    }
                },
            );
            let mut r_m = 0u64;
            run_until_exit(
                &s2,
                kill as i32,
                |c| shell_clearance(c, mi),
                &mut src,
                rng,
                |c| {
                    if c[0].abs().max(c[1].abs()).max(c[2].abs()) == mi {
                        r_m += counts[ix.index_unchecked(c)] as u64;
                    }
                },
            );
            for &i in touched.iter() {
                counts[i] = 0;
            }
            touched.clear();
            r_m
        },
    );
    let hits = results.iter().filter(|r| **r > 0).count() as u64;
    let r_m_mean = crate::stats::neumaier_sum(results.iter().map(|r| *r as f64)) / trials as f64;
    let bias = (2.0 * return_bias_bound(2 * m, kill, 1e-10)?).min(1.0);
    Ok(AnnulusReport {
        m,
        kill_radius: kill,
        estimate: ExperimentEstimate::proportion(hits, trials as u64)?.with_bias(bias),
        r_m_mean,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscOccupationReport {
    pub m: u32,
    pub epsilon: f64,
    /// Pooled over all sampled starts.
    pub estimate: ExperimentEstimate,
    /// Lowest per-start estimate and its start point.
    pub worst: ExperimentEstimate,
    pub worst_start: Point,
    pub seed: u64,
}

fn in_quarter(c: &[i32], hi: i32) -> bool {
    c[2] == 0 && (0..=hi).contains(&c[0]) && (0..=hi).contains(&c[1])
}

/// `P[#{i < ξ_{2M} : X_i ∈ D⁺(0,2M)} > εM]` for starts sampled uniformly
/// from `B(0, M+1)`; `trials` walks per start.
pub fn quarter_disc_occupation(
    m: u32,
    epsilon: f64,
    starts: usize,
    trials: usize,
    seed: u64,
) -> Result<DiscOccupationReport> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("M must be at least 4, got {m}")));
    }
    if trials == 0 || starts == 0 {
        return Err(Error::InvalidArgument("trials and starts must be positive".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
    }
    let mut srng = crate::rng::stream_rng(seed, u64::MAX);
    let r = m as i32 + 1;
    let start_pts: Vec<Point> =
        (0..starts).map(|_| Point::new((0..3).map(|_| srng.random_range(-r..=r)).collect())).collect();
    let threshold = epsilon * m as f64;
    let hi = 2 * m as i32;
    let outcomes = par_trials_init(
        seed,
        starts * trials,
        || (),
        |_, i, rng| {
            let s = start_pts[i / trials].coords();
            let mut count = 0u64;
            run_until_exit(
                s,
                hi,
                |c| quarter_clearance(c, hi),
                &mut StepSource::new(3),
                rng,
                |c| {
                    if in_quarter(c, hi) {
                        count += 1;
                    }
                },
            );
            count as f64 > threshold
        },
    );
    let total = outcomes.iter().filter(|o| **o).count() as u64;
    let mut worst: Option<(ExperimentEstimate, Point)> = None;
    for (k, chunk) in outcomes.chunks(trials).enumerate() {
        let e = ExperimentEstimate::proportion(chunk.iter().filter(|o| **o).count() as u64, trials as u64)?;
        if worst.as_ref().is_none_or(|(w, _)| e.estimate < w.estimate) {
            worst = Some((e, start_pts[k].clone()));
        }
    }
    let (worst, worst_start) = worst.expect("at least one start");
    Ok(DiscOccupationReport {
        m,
        epsilon,
        estimate: ExperimentEstimate::proportion(total, (starts * trials) as u64)?,
        worst,
        worst_start,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscFunctionalReport {
    pub m: u32,
    pub epsilon: f64,
    pub kill_radius: u32,
    /// `P[D_M >= ε log M]`.
    pub estimate: ExperimentEstimate,
    /// Sample mean of `D_M` with its standard error.
    pub mean: ExperimentEstimate,
    /// Probability of a return to `B(0,M)` after leaving `B(0,kill)`.
    pub bias_bound: f64,
    pub seed: u64,
}

/// Green table covering `D⁺(0,M)`.
pub fn disc_green_table(m: u32, tol: f64) -> Result<GreenTable> {
    let mut t = GreenTable::new(3, tol)?;
    let pts = enumerate_disc(&DiscSpec { center: Point::origin(3), halfwidth: m, quarter: true })?;
    t.ensure(&pts)?;
    Ok(t)
}

/// `D_M = Σ_i G(0,X_i) 1{X_i ∈ D⁺(0,M)}` for a walk from the origin killed
/// on leaving `B(0, kill)` (default `M²`).
pub fn green_weighted_functional(
    m: u32,
    epsilon: f64,
    kill_radius: Option<u32>,
    trials: usize,
    seed: u64,
    greens: &DenseGreen,
) -> Result<DiscFunctionalReport> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!("M must be at least 8, got {m}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if greens.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: greens.dim() });
    }
    let mi = m as i32;
    for a in 0..=mi {
        for b in 0..=mi {
            greens.get_checked(&[a, b, 0])?;
        }
    }
    let kill = kill_radius.unwrap_or(m * m);
    if kill <= m {
        return Err(Error::InvalidArgument("kill radius must exceed M".into()));
    }
    let threshold = epsilon * (m as f64).ln();
    let values = par_trials_init(
        seed,
        trials,
        || (),
        |_, _, rng| {
            let mut d_m = 0.0;
            run_until_exit(
                &[0, 0, 0],
                kill as i32,
                |c| quarter_clearance(c, mi),
                &mut StepSource::new(3),
                rng,
                |c| {
                    if in_quarter(c, mi) {
                        d_m += greens.get(c);
                    }
                },
            );
            d_m
        },
    );
    let hits = values.iter().filter(|v| **v >= threshold).count() as u64;
    let bias = return_bias_bound(m, kill, 1e-10)?;
    Ok(DiscFunctionalReport {
        m,
        epsilon,
        kill_radius: kill,
        estimate: ExperimentEstimate::proportion(hits, trials as u64)?.with_bias(bias),
        mean: ExperimentEstimate::mean(&values)?,
        bias_bound: bias,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn pts(v: &[[i32; 3]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    #[test]
    fn cube_exit_law() {
        let e = CubeExit::new(2);
        assert_eq!(e.offsets.len(), 6 * 25);
        assert!(e.offsets.iter().all(|o| o.iter().map(|v| v.abs()).max() == Some(3)));
        let w = |o: [i32; 3]| {
            let k = e.offsets.iter().position(|p| *p == o).unwrap();
            e.weights[k]
        };
        let face = w([3, 0, 0]);
        assert!((face - w([0, 0, -3])).abs() < 1e-15);
        // plain stepping oracle
        let mut rng = stream_rng(5, 0);
        let mut src = StepSource::new(3);
        let n = 200_000;
        let mut hits = 0;
        for _ in 0..n {
            let mut c = [0i32; 3];
            while c.iter().all(|v| v.abs() <= 2) {
                apply_step(&mut c, src.next(&mut rng));
            }
            if c == [3, 0, 0] {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let se = (face * (1.0 - face) / n as f64).sqrt();
        assert!((p - face).abs() < 4.0 * se, "{p} vs {face}");
    }

    #[test]
    fn jumps_preserve_visit_law() {
        // shell-visit counts with and without jumps agree in mean
        let runs = 4000;
        let mean = |jump: bool| {
            let mut rng = stream_rng(9, jump as u64);
            let mut src = StepSource::new(3);
            let mut tot = 0u64;
            for _ in 0..runs {
                let clear = |c: &[i32; 3]| if jump { shell_clearance(c, 4) } else { 0 };
                run_until_exit(&[8, 0, 0], 40, clear, &mut src, &mut rng, |c| {
                    if c.iter().map(|v| v.abs()).max() == Some(4) {
                        tot += 1;
                    }
                });
            }
            tot as f64 / runs as f64
        };
        let (a, b) = (mean(false), mean(true));
        assert!((a - b).abs() < 0.15 * a.max(b), "{a} vs {b}");
    }

    #[test]
    fn walk_examples() {
        let mut rng = stream_rng(1, 0);
        for d in [1, 3, 5] {
            let t = simulate_walk(&Point::origin(d), Stop::ExitRadius(0), &mut rng);
            assert_eq!(t.len(), 2);
            assert_eq!(t.steps[1].linf_norm(), 1);
        }
        let t = simulate_walk(&Point::origin(3), Stop::StepBudget(0), &mut rng);
        assert_eq!(t.len(), 1);
        let t = simulate_walk(&Point::origin(3), Stop::StepBudget(50), &mut rng);
        assert_eq!(t.len(), 51);
        assert!(t.steps.windows(2).all(|w| w[0].l1_dist(&w[1]) == 1));
        let t = simulate_walk(&Point::origin(3), Stop::ExitRadius(5), &mut rng);
        let (last, body) = t.steps.split_last().unwrap();
        assert_eq!(last.linf_norm(), 6);
        assert!(body.iter().all(|p| p.linf_norm() <= 5));
    }

    #[test]
    fn step_source_is_uniform() {
        let mut rng = stream_rng(2, 0);
        for d in [3usize, 5] {
            let mut src = StepSource::new(d);
            let mut hist = vec![0u64; 2 * d];
            let n = 600_000;
            for _ in 0..n {
                hist[src.next(&mut rng)] += 1;
            }
            let p = 1.0 / (2 * d) as f64;
            let se = (n as f64 * p * (1.0 - p)).sqrt();
            for h in hist {
                assert!((h as f64 - n as f64 * p).abs() < 5.0 * se);
            }
        }
    }

    #[test]
    fn cut_time_examples() {
        let mono = pts(&[[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]);
        assert_eq!(cut_times(&mono, 0), vec![0, 1, 2, 3]);
        assert_eq!(cut_times(&mono, 1), vec![0, 1, 2]);
        let back = pts(&[[0, 0, 0], [1, 0, 0], [0, 0, 0]]);
        assert_eq!(cut_times(&back, 0), vec![2]);
        assert!(cut_times(&back, 3).is_empty());
    }

    #[test]
    fn determinism() {
        let a = simulate_walk(&Point::origin(3), Stop::StepBudget(100), &mut stream_rng(5, 7));
        let b = simulate_walk(&Point::origin(3), Stop::StepBudget(100), &mut stream_rng(5, 7));
        assert_eq!(a, b);
    }

    #[test]
    fn bias_bound_decreases_with_kill_radius() {
        let a = return_bias_bound(8, 64, 1e-10).unwrap();
        let b = return_bias_bound(8, 256, 1e-10).unwrap();
        assert!(b < a && a < 1.0);
    }

    #[test]
    fn zero_epsilon_edge_cases() {
        let r = quarter_disc_occupation(4, 0.0, 3, 50, 3).unwrap();
        assert!(r.estimate.estimate >= 0.0);
        let t = disc_green_table(8, 1e-10).unwrap();
        let g = t.to_dense(8);
        let f = green_weighted_functional(8, 0.0, Some(64), 20, 1, &g).unwrap();
        assert_eq!(f.estimate.estimate, 1.0);
        let small = GreenTable::ball(3, 2, 1e-10).unwrap().to_dense(2);
        assert!(matches!(green_weighted_functional(8, 0.1, None, 5, 1, &small), Err(Error::GreenCoverage(_))));
    }

    #[test]
    fn annulus_small_positive() {
        let r = annulus_intersection_estimate(2, None, 2000, 11).unwrap();
        assert!(r.estimate.estimate > 0.0);
        assert!(r.r_m_mean > 0.0);
        assert!(annulus_intersection_estimate(2, None, 0, 1).is_err());
    }
}

//! Bernoulli site percolation on `{0,1}^d`: atoms, ubiquitous components,
//! the five-cube seed event on the slab `ℤ² × {0,1}^{d-2}`, and the
//! domination check against interlacement occupancy.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::clusters::UnionFind;
use crate::error::{Error, Result};
use crate::interlace::{sample_interlacement, ForwardPolicy, SampleOptions, WindowKernel};
use crate::potential::{escape_probability_hypercube, green, DEFAULT_TOL};
use crate::report::{fmt_f64, CsvTable};
use crate::rng::{par_trials, try_par_trials};
use crate::stats::ExperimentEstimate;

pub const MAX_DIM: usize = 24;

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::Guard(format!("hypercube dimension {d} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// Occupancy of `{0,1}^d`, vertex `v` at bit `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercubeConfig {
    pub dim: usize,
    pub occupancy: Bitset,
}

impl HypercubeConfig {
    pub fn empty(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(HypercubeConfig { dim: d, occupancy: Bitset::new(1 << d) })
    }

    pub fn full(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(HypercubeConfig { dim: d, occupancy: Bitset::full(1 << d) })
    }

    pub fn len(&self) -> usize {
        1 << self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Components of occupied vertices under single-bit flips, each sorted,
    /// listed by smallest vertex.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for v in self.occupancy.iter_ones() {
            for k in 0..self.dim {
                let w = v ^ (1 << k);
                if w > v && self.occupancy.get(w) {
                    uf.union(v, w);
                }
            }
        }
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<u32>> = Vec::new();
        for v in self.occupancy.iter_ones() {
            let r = uf.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(v as u32);
        }
        out
    }

    /// `|A ∪ N(A)|`.
    pub fn closure_size(&self, a: &[u32]) -> usize {
        let mut seen = Bitset::new(self.len());
        for &v in a {
            seen.set(v as usize);
            for k in 0..self.dim {
                seen.set(v as usize ^ (1 << k));
            }
        }
        seen.count_ones()
    }
}

pub fn bernoulli_hypercube<R: Rng + ?Sized>(d: usize, p: f64, rng: &mut R) -> Result<HypercubeConfig> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0,1]")));
    }
    let mut c = HypercubeConfig::empty(d)?;
    for v in 0..c.len() {
        if rng.random::<f64>() < p {
            c.occupancy.set(v);
        }
    }
    Ok(c)
}

/// Components with more than `threshold` vertices.
pub fn atoms(config: &HypercubeConfig, threshold: usize) -> Vec<Vec<u32>> {
    config.components().into_iter().filter(|c| c.len() > threshold).collect()
}

/// Default atom threshold `d²`.
pub fn default_atom_threshold(d: usize) -> usize {
    d * d
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UbiquityReport {
    pub found: bool,
    pub component: Option<Vec<u32>>,
    /// `|A ∪ N(A)|` of the ubiquitous component, 0 if none.
    pub closure: usize,
    /// `(1 - 1/d²) 2^d`.
    pub threshold: f64,
}

pub fn ubiquity_threshold(d: usize) -> f64 {
    (1.0 - 1.0 / (d * d) as f64) * (1u64 << d) as f64
}

/// The component whose closure exceeds `(1 - 1/d²) 2^d`; two such
/// components is a consistency failure.
pub fn ubiquitous(config: &HypercubeConfig) -> Result<UbiquityReport> {
    let threshold = ubiquity_threshold(config.dim);
    let mut found: Option<(Vec<u32>, usize)> = None;
    for c in config.components() {
        // |A ∪ N(A)| <= (d+1)|A|
        if ((config.dim + 1) * c.len()) as f64 <= threshold {
            continue;
        }
        let cl = config.closure_size(&c);
        if cl as f64 > threshold {
            if found.is_some() {
                return Err(Error::Consistency(format!("two ubiquitous components in a {}-cube", config.dim)));
            }
            found = Some((c, cl));
        }
    }
    Ok(match found {
        Some((c, cl)) => UbiquityReport { found: true, component: Some(c), closure: cl, threshold },
        None => UbiquityReport { found: false, component: None, closure: 0, threshold },
    })
}

/// Occupancy of planar sites `[0,w) × [0,h)`, each carrying a column
/// `{0,1}^{d-2}`. Cell `(i,j)` is the cube on planar sites
/// `{i,i+1} × {j,j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlabField {
    pub dim: usize,
    pub width: usize,
    pub height: usize,
    /// Row-major in `(y, x)`; `None` marks a site outside the region.
    pub columns: Vec<Option<Bitset>>,
}

impl SlabField {
    pub fn bernoulli<R: Rng + ?Sized>(d: usize, p: f64, width: usize, height: usize, rng: &mut R) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument("slab cells need d >= 2".into()));
        }
        check_dim(d)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0,1]")));
        }
        let col = 1usize << (d - 2);
        let columns = (0..width * height)
            .map(|_| {
                let mut b = Bitset::new(col);
                for v in 0..col {
                    if rng.random::<f64>() < p {
                        b.set(v);
                    }
                }
                Some(b)
            })
            .collect();
        Ok(SlabField { dim: d, width, height, columns })
    }

    fn column(&self, x: usize, y: usize) -> Option<&Bitset> {
        self.columns[y * self.width + x].as_ref()
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.width.saturating_sub(1), self.height.saturating_sub(1))
    }

    /// The cube of cell `(i,j)`: bit 0 is the `x` offset, bit 1 the `y`
    /// offset, higher bits the column.
    pub fn cube(&self, i: usize, j: usize) -> Result<HypercubeConfig> {
        let mut c = HypercubeConfig::empty(self.dim)?;
        for dy in 0..2 {
            for dx in 0..2 {
                let col = self
                    .column(i + dx, j + dy)
                    .ok_or_else(|| Error::Geometry(format!("cell ({i},{j}) leaves the region")))?;
                for v in col.iter_ones() {
                    c.occupancy.set(dx | (dy << 1) | (v << 2));
                }
            }
        }
        Ok(c)
    }

    /// Whether slab vertices `a` and `b` (planar `x`, `y`, column bits) are
    /// joined by occupied vertices on the planar sites `sites`.
    fn connected_within(&self, sites: &[(usize, usize)], a: (usize, usize, usize), b: (usize, usize, usize)) -> bool {
        let col = 1usize << (self.dim - 2);
        let allowed = |x: usize, y: usize| sites.contains(&(x, y));
        let occupied = |x: usize, y: usize, v: usize| allowed(x, y) && self.column(x, y).is_some_and(|c| c.get(v));
        if !occupied(a.0, a.1, a.2) || !occupied(b.0, b.1, b.2) {
            return false;
        }
        let key = |x: usize, y: usize, v: usize| (y * self.width + x) * col + v;
        let mut seen = std::collections::HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(key(a.0, a.1, a.2));
        queue.push_back(a);
        while let Some((x, y, v)) = queue.pop_front() {
            if (x, y, v) == b {
                return true;
            }
            let mut next: Vec<(usize, usize, usize)> = (0..self.dim - 2).map(|k| (x, y, v ^ (1 << k))).collect();
            if x + 1 < self.width {
                next.push((x + 1, y, v));
            }
            if x > 0 {
                next.push((x - 1, y, v));
            }
            if y + 1 < self.height {
                next.push((x, y + 1, v));
            }
            if y > 0 {
                next.push((x, y - 1, v));
            }
            for (nx, ny, nv) in next {
                if occupied(nx, ny, nv) && seen.insert(key(nx, ny, nv)) {
                    queue.push_back((nx, ny, nv));
                }
            }
        }
        false
    }

    fn cell_sites(i: usize, j: usize) -> [(usize, usize); 4] {
        [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
    }

    /// Five-cube seed at cell `(i,j)` with neighbors `(i±1,j)`, `(i,j±1)`.
    pub fn five_cell_seed_at(&self, i: usize, j: usize) -> Result<bool> {
        if i == 0 || j == 0 || i + 2 >= self.width || j + 2 >= self.height {
            return Err(Error::Geometry(format!("cell ({i},{j}) lacks four neighbors in the field")));
        }
        let center = match ubiquitous(&self.cube(i, j)?)?.component {
            Some(c) => c,
            None => return Ok(false),
        };
        let lift = |ci: usize, cj: usize, v: u32| {
            let v = v as usize;
            (ci + (v & 1), cj + ((v >> 1) & 1), v >> 2)
        };
        let a = lift(i, j, center[0]);
        for (ni, nj) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
            let comp = match ubiquitous(&self.cube(ni, nj)?)?.component {
                Some(c) => c,
                None => return Ok(false),
            };
            let mut sites = Self::cell_sites(i, j).to_vec();
            sites.extend(Self::cell_sites(ni, nj));
            if !self.connected_within(&sites, a, lift(ni, nj, comp[0])) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Seed outcomes on every cell with four neighbors; grid of
    /// `(cells_x - 2) × (cells_y - 2)`.
    pub fn seed_grid(&self) -> Result<CellGrid> {
        let (cx, cy) = self.cells();
        if cx < 3 || cy < 3 {
            return Err(Error::Geometry("field too small for interior cells".into()));
        }
        let (w, h) = (cx - 2, cy - 2);
        let mut values = Vec::with_capacity(w * h);
        for j in 1..=h {
            for i in 1..=w {
                values.push(self.five_cell_seed_at(i, j)?);
            }
        }
        CellGrid::new(w, h, values)
    }
}

/// Five-cube seed from separately given cubes, ordered center, `+e₁`,
/// `-e₁`, `+e₂`, `-e₂`. Shared facets must agree.
pub fn five_cell_seed(cubes: &[HypercubeConfig; 5]) -> Result<bool> {
    let d = cubes[0].dim;
    if d < 2 || cubes.iter().any(|c| c.dim != d) {
        return Err(Error::InvalidArgument("five cubes of one dimension >= 2 required".into()));
    }
    let col = 1usize << (d - 2);
    // planar sites x, y ∈ 0..4, center cell at (1,1)
    let mut columns: Vec<Option<Bitset>> = vec![None; 16];
    let offsets = [(1usize, 1usize), (2, 1), (0, 1), (1, 2), (1, 0)];
    for (cube, &(ci, cj)) in cubes.iter().zip(&offsets) {
        for dy in 0..2 {
            for dx in 0..2 {
                let mut b = Bitset::new(col);
                for v in 0..col {
                    if cube.occupancy.get(dx | (dy << 1) | (v << 2)) {
                        b.set(v);
                    }
                }
                let slot = &mut columns[(cj + dy) * 4 + ci + dx];
                match slot {
                    Some(existing) if *existing != b => {
                        return Err(Error::Consistency(format!(
                            "cubes disagree on the shared facet at planar site ({}, {})",
                            ci + dx,
                            cj + dy
                        )))
                    }
                    _ => *slot = Some(b),
                }
            }
        }
    }
    SlabField { dim: d, width: 4, height: 4, columns }.five_cell_seed_at(1, 1)
}

/// Boolean grid, row-major in `(y, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<bool>,
}

impl CellGrid {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument("grid size does not match values".into()));
        }
        Ok(CellGrid { width, height, values })
    }
}

/// Left-right crossing of good cells by nearest-neighbor steps.
pub fn slab_scan(grid: &CellGrid) -> bool {
    let (w, h) = (grid.width, grid.height);
    if w == 0 || h == 0 {
        return false;
    }
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        if grid.values[y * w] {
            seen[y * w] = true;
            queue.push_back((0usize, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        if x == w - 1 {
            return true;
        }
        let mut try_push = |nx: usize, ny: usize| {
            let i = ny * w + nx;
            if grid.values[i] && !seen[i] {
                seen[i] = true;
                queue.push_back((nx, ny));
            }
        };
        try_push(x + 1, y);
        if x > 0 {
            try_push(x - 1, y);
        }
        if y + 1 < h {
            try_push(x, y + 1);
        }
        if y > 0 {
            try_push(x, y - 1);
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleVertexInequality {
    pub d: usize,
    /// `cap({0}) = 1/G(0,0)`.
    pub cap0: f64,
    pub p_esc: f64,
    pub holds: bool,
}

/// `1 - e^{-cap({0})} >= 1 - e^{-p_esc²}`, i.e. `cap({0}) >= p_esc²`.
pub fn single_vertex_inequality(d: usize) -> Result<SingleVertexInequality> {
    let cap0 = 1.0 / green(&crate::Point::origin(d), d, DEFAULT_TOL)?;
    let p_esc = escape_probability_hypercube(d, DEFAULT_TOL)?.p_esc;
    Ok(SingleVertexInequality { d, cap0, p_esc, holds: 1.0 - (-cap0).exp() >= 1.0 - (-p_esc * p_esc).exp() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub d: usize,
    pub set: Vec<u32>,
    pub p_esc: f64,
    /// `(1 - e^{-p_esc²})^{|S|}`.
    pub bound: f64,
    pub estimate: ExperimentEstimate,
    /// `estimate >= bound - 3 SE - bias`.
    pub holds: bool,
}

pub const DOMINATION_MAX_DIM: usize = 6;
pub const DOMINATION_MAX_SET: usize = 4;

/// Estimates `P[S ⊆ ℐ¹]` for hypercube vertices `S` from samples in
/// `B(0,1) ⊇ {0,1}^d`.
pub fn domination_margin_check(d: usize, set: &[u32], trials: usize, seed: u64) -> Result<DominationReport> {
    if d > DOMINATION_MAX_DIM || set.len() > DOMINATION_MAX_SET {
        return Err(Error::Guard(format!(
            "domination check limited to d <= {DOMINATION_MAX_DIM}, |S| <= {DOMINATION_MAX_SET}"
        )));
    }
    check_dim(d)?;
    if set.iter().any(|v| (*v as usize) >= (1 << d)) {
        return Err(Error::InvalidArgument(format!("vertex outside {{0,1}}^{d}")));
    }
    let p_esc = escape_probability_hypercube(d, DEFAULT_TOL)?.p_esc;
    let bound = (1.0 - (-p_esc * p_esc).exp()).powi(set.len() as i32);
    let kernel = WindowKernel::new(d, 1, ForwardPolicy::Exact, DEFAULT_TOL)?;
    let ix = kernel.indexer();
    let sites: Vec<usize> = set
        .iter()
        .map(|v| {
            let c: Vec<i32> = (0..d).map(|k| ((v >> k) & 1) as i32).collect();
            ix.index_unchecked(&c)
        })
        .collect();
    let hits = try_par_trials(seed, trials, |_, rng| {
        let s = sample_interlacement(&kernel, 1.0, rng, SampleOptions::default())?;
        Ok::<_, Error>(sites.iter().all(|&i| s.occupancy.get(i)))
    })?;
    let estimate = ExperimentEstimate::proportion(hits.iter().filter(|h| **h).count() as u64, trials as u64)?
        .with_bias(kernel.spec().bias);
    let holds = estimate.estimate >= bound - 3.0 * estimate.std_err - estimate.bias;
    Ok(DominationReport { d, set: set.to_vec(), p_esc, bound, estimate, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypercubeTrial {
    pub trial: usize,
    pub occupied: usize,
    pub atoms: usize,
    pub largest: usize,
    pub ubiquitous: bool,
    pub closure: usize,
}

/// Per-trial statistics of Bernoulli(`p`) cubes, trial `i` on stream `i`.
pub fn hypercube_trials(
    d: usize,
    p: f64,
    atom_threshold: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<HypercubeTrial>> {
    check_dim(d)?;
    let out: Vec<Result<HypercubeTrial>> = par_trials(seed, trials, |i, rng| {
        let c = bernoulli_hypercube(d, p, rng)?;
        let comps = c.components();
        let u = ubiquitous(&c)?;
        Ok(HypercubeTrial {
            trial: i,
            occupied: c.occupancy.count_ones(),
            atoms: comps.iter().filter(|a| a.len() > atom_threshold).count(),
            largest: comps.iter().map(|a| a.len()).max().unwrap_or(0),
            ubiquitous: u.found,
            closure: u.closure,
        })
    });
    out.into_iter().collect()
}

pub fn trials_to_csv(d: usize, p: f64, atom_threshold: usize, seed: u64, rows: &[HypercubeTrial]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "d",
        "p",
        "atom_threshold",
        "trial",
        "occupied",
        "atoms",
        "largest",
        "ubiquitous",
        "closure",
        "seed",
    ]);
    for r in rows {
        t.push(vec![
            d.to_string(),
            fmt_f64(p),
            atom_threshold.to_string(),
            r.trial.to_string(),
            r.occupied.to_string(),
            r.atoms.to_string(),
            r.largest.to_string(),
            u8::from(r.ubiquitous).to_string(),
            r.closure.to_string(),
            seed.to_string(),
        ]);
    }
    t
}

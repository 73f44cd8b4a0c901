//! `𝒦 = ℐ₁ ∩ ℐ₂`, `𝒱 = 𝒱₁ ∪ 𝒱₂`, connected components and the crossing
//! and seed events evaluated on them.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::interlace::{EdgeSet, InterlacementSample, WindowSpec};
use crate::lattice::{Adjacency, BoxIndexer, Point};

/// Union-find with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        let mut c = x;
        while self.parent[c] as usize != r {
            let next = self.parent[c] as usize;
            self.parent[c] = r as u32;
            c = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairConfiguration {
    pub window: WindowSpec,
    pub occupancy_k: Bitset,
    pub occupancy_v: Bitset,
}

pub fn build_pair(s1: &InterlacementSample, s2: &InterlacementSample) -> Result<PairConfiguration> {
    if !s1.window.same_window(&s2.window) {
        return Err(Error::WindowMismatch(format!(
            "(d={}, N={}) vs (d={}, N={})",
            s1.window.dim, s1.window.radius, s2.window.dim, s2.window.radius
        )));
    }
    let k = s1.occupancy.and(&s2.occupancy)?;
    let v = k.not();
    Ok(PairConfiguration { window: s1.window.clone(), occupancy_k: k, occupancy_v: v })
}

/// Component labels over a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Per site: minimal site index of its component, `u32::MAX` if vacant.
    pub labels: Vec<u32>,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    pub mode: Adjacency,
}

/// Offsets `(Δcoords)` of the "forward" half of the neighborhood, so each
/// unordered adjacent pair is visited once.
fn forward_offsets(dim: usize, mode: Adjacency) -> Vec<Vec<i32>> {
    match mode {
        Adjacency::Nearest => (0..dim)
            .map(|k| {
                let mut v = vec![0; dim];
                v[k] = 1;
                v
            })
            .collect(),
        Adjacency::Star => crate::lattice::neighbors(&Point::origin(dim), Adjacency::Star)
            .into_iter()
            .map(|p| p.into_coords())
            .filter(|c| c.iter().find(|v| **v != 0).copied() == Some(1))
            .collect(),
    }
}

fn check_len(occ: &Bitset, ix: &BoxIndexer) -> Result<()> {
    if occ.len() != ix.len() {
        return Err(Error::WindowMismatch(format!("occupancy of {} sites, window of {}", occ.len(), ix.len())));
    }
    Ok(())
}

pub fn components(occ: &Bitset, ix: &BoxIndexer, mode: Adjacency) -> Result<ClusterReport> {
    check_len(occ, ix)?;
    let d = ix.dim();
    let r = ix.radius() as i32;
    let offsets = forward_offsets(d, mode);
    let mut uf = UnionFind::new(ix.len());
    let mut c = vec![0i32; d];
    let mut nb = vec![0i32; d];
    for a in occ.iter_ones() {
        ix.coords_of(a, &mut c);
        'off: for off in &offsets {
            for k in 0..d {
                nb[k] = c[k] + off[k];
                if nb[k].abs() > r {
                    continue 'off;
                }
            }
            let b = ix.index_unchecked(&nb);
            if occ.get(b) {
                uf.union(a, b);
            }
        }
    }
    Ok(label(occ, &mut uf, mode))
}

fn label(occ: &Bitset, uf: &mut UnionFind, mode: Adjacency) -> ClusterReport {
    let n = occ.len();
    let mut labels = vec![u32::MAX; n];
    let mut root_label = vec![u32::MAX; n];
    let mut root_size = vec![0usize; n];
    for a in occ.iter_ones() {
        let root = uf.find(a);
        if root_label[root] == u32::MAX {
            root_label[root] = a as u32;
        }
        labels[a] = root_label[root];
        root_size[root] += 1;
    }
    let mut sizes: Vec<usize> = root_size.into_iter().filter(|s| *s > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ClusterReport { labels, sizes, mode }
}

/// Components of the graph whose vertices are the occupied sites and whose
/// edges are `edges` (both endpoints occupied).
pub fn edge_components(occ: &Bitset, edges: &EdgeSet, ix: &BoxIndexer) -> Result<ClusterReport> {
    check_len(occ, ix)?;
    let mut uf = UnionFind::new(ix.len());
    for (a, k) in edges.iter() {
        let b = a + ix.strides()[k];
        if occ.get(a) && occ.get(b) {
            uf.union(a, b);
        }
    }
    Ok(label(occ, &mut uf, Adjacency::Nearest))
}

pub fn two_largest(report: &ClusterReport) -> (usize, usize) {
    (report.sizes.first().copied().unwrap_or(0), report.sizes.get(1).copied().unwrap_or(0))
}

/// Breadth-first search over occupied sites `y` with `|y - c|∞ <= limit`,
/// nearest-neighbor steps, from `sources`. Returns a path ending at a site
/// with `|y - c|∞ = limit`, if one is reached.
fn sphere_path(
    occ: &Bitset,
    ix: &BoxIndexer,
    center: &[i32],
    sources: impl Iterator<Item = usize>,
    limit: i32,
) -> Option<Vec<usize>> {
    let d = ix.dim();
    let mut parent: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    let mut c = vec![0i32; d];
    for s in sources {
        if occ.get(s) && !parent.contains_key(&s) {
            parent.insert(s, s);
            queue.push_back(s);
        }
    }
    while let Some(a) = queue.pop_front() {
        ix.coords_of(a, &mut c);
        if (0..d).any(|k| (c[k] - center[k]).abs() == limit) {
            let mut path = vec![a];
            let mut cur = a;
            while parent[&cur] != cur {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for k in 0..d {
            for s in [1i32, -1] {
                if (c[k] + s - center[k]).abs() > limit {
                    continue;
                }
                let b = if s > 0 { a + ix.strides()[k] } else { a - ix.strides()[k] };
                if occ.get(b) && !parent.contains_key(&b) {
                    parent.insert(b, a);
                    queue.push_back(b);
                }
            }
        }
    }
    None
}

fn box_sites<'a>(ix: &'a BoxIndexer, center: &[i32], radius: u32) -> impl Iterator<Item = usize> + 'a {
    let c = Point::new(center.to_vec());
    crate::lattice::LatticeBox::new(c, radius).points().into_iter().map(move |p| ix.index_unchecked(p.coords()))
}

fn require_inside(ix: &BoxIndexer, center: &[i32], radius: u32) -> Result<()> {
    if center.len() != ix.dim() {
        return Err(Error::DimensionMismatch { expected: ix.dim(), got: center.len() });
    }
    let r = ix.radius() as i64;
    if center.iter().any(|v| (*v as i64).abs() + radius as i64 > r) {
        return Err(Error::Geometry(format!("B({center:?}, {radius}) leaves the window of radius {r}")));
    }
    Ok(())
}

/// `B(0,L) ↔ ∂ᵢB(0,2L)` by a nearest-neighbor path in `occ`.
pub fn crossing_event(occ: &Bitset, ix: &BoxIndexer, l: u32) -> Result<bool> {
    crossing_event_at(occ, ix, &vec![0; ix.dim()], l)
}

/// `B(c,L) ↔ ∂ᵢB(c,2L)`.
pub fn crossing_event_at(occ: &Bitset, ix: &BoxIndexer, center: &[i32], l: u32) -> Result<bool> {
    check_len(occ, ix)?;
    require_inside(ix, center, 2 * l)?;
    Ok(sphere_path(occ, ix, center, box_sites(ix, center, l), 2 * l as i32).is_some())
}

/// `0 ↔ ∂ᵢB(0,L)` in `occ`.
pub fn one_arm_event(occ: &Bitset, ix: &BoxIndexer, l: u32) -> Result<bool> {
    Ok(one_arm_path(occ, ix, l)?.is_some())
}

/// A path from the origin to `∂ᵢB(0,L)` in `occ`, as site indices.
pub fn one_arm_path(occ: &Bitset, ix: &BoxIndexer, l: u32) -> Result<Option<Vec<usize>>> {
    check_len(occ, ix)?;
    let origin = vec![0; ix.dim()];
    require_inside(ix, &origin, l)?;
    let o = ix.index_unchecked(&origin);
    Ok(sphere_path(occ, ix, &origin, std::iter::once(o), l as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedEventParams {
    pub l0: u32,
    pub u1: f64,
    /// `m(u₁) = 1 - e^{-u₁ cap({0})}`.
    pub m: f64,
}

impl SeedEventParams {
    pub fn new(l0: u32, u1: f64, cap0: f64) -> Result<Self> {
        if l0 == 0 {
            return Err(Error::InvalidArgument("L0 must be positive".into()));
        }
        let m = 1.0 - (-u1 * cap0).exp();
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidArgument(format!("density m(u1) = {m} outside (0,1)")));
        }
        Ok(SeedEventParams { l0, u1, m })
    }
}

/// Which qualifying subbox components `E_x` must connect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedSelection {
    /// Every qualifying component of every subbox.
    #[default]
    AllQualifying,
    /// Some choice of one qualifying component per subbox.
    AnyChoice,
}

/// Connectivity used inside `E_x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedConnectivity {
    /// Recorded trajectory edges (`Ĩ`).
    #[default]
    Edges,
    /// Nearest-neighbor adjacency of occupied sites.
    Vertices,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRule {
    pub connectivity: SeedConnectivity,
    pub selection: SeedSelection,
}

/// Site indices of `x + [0, side)^d`, or a geometry error.
fn cube_sites(ix: &BoxIndexer, x: &[i32], side: i32) -> Result<Vec<usize>> {
    let d = ix.dim();
    let r = ix.radius() as i32;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    if x.iter().any(|v| *v < -r || *v + side - 1 > r) {
        return Err(Error::Geometry(format!("cube at {x:?} of side {side} leaves the window")));
    }
    let mut out = Vec::with_capacity((side as usize).pow(d as u32));
    let mut off = vec![0i32; d];
    let mut c = vec![0i32; d];
    loop {
        for k in 0..d {
            c[k] = x[k] + off[k];
        }
        out.push(ix.index_unchecked(&c));
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            off[k] += 1;
            if off[k] < side {
                break;
            }
            off[k] = 0;
        }
    }
}

/// Components of the occupied sites in `sites` (a cube), using `conn`.
/// Returns a union-find over window indices.
fn local_union(
    occ: &Bitset,
    edges: &EdgeSet,
    ix: &BoxIndexer,
    lo: &[i32],
    side: i32,
    conn: SeedConnectivity,
    uf: &mut UnionFind,
    sites: &[usize],
) {
    let d = ix.dim();
    let mut c = vec![0i32; d];
    for &a in sites {
        if !occ.get(a) {
            continue;
        }
        ix.coords_of(a, &mut c);
        for k in 0..d {
            if c[k] + 1 >= lo[k] + side {
                continue;
            }
            let b = a + ix.strides()[k];
            let linked = match conn {
                SeedConnectivity::Edges => edges.contains(a, k),
                SeedConnectivity::Vertices => true,
            };
            if linked && occ.get(b) {
                uf.union(a, b);
            }
        }
    }
}

fn subbox_corners(x: &[i32], l0: i32) -> Vec<Vec<i32>> {
    let d = x.len();
    (0..1u32 << d).map(|e| (0..d).map(|k| x[k] + if (e >> k) & 1 == 1 { l0 } else { 0 }).collect()).collect()
}

/// `E_x`: every subbox `x + eL₀ + [0,L₀)^d` has a component with at least
/// `(3/4) m L₀^d` vertices, and all such components are connected inside
/// `x + [0,2L₀)^d`.
pub fn seed_e(
    sample: &InterlacementSample,
    ix: &BoxIndexer,
    x: &Point,
    params: &SeedEventParams,
    rule: SeedRule,
) -> Result<bool> {
    seed_e_raw(&sample.occupancy, &sample.edges, ix, x.coords(), params, rule)
}

pub fn seed_e_raw(
    occ: &Bitset,
    edges: &EdgeSet,
    ix: &BoxIndexer,
    x: &[i32],
    params: &SeedEventParams,
    rule: SeedRule,
) -> Result<bool> {
    check_len(occ, ix)?;
    let l0 = params.l0 as i32;
    let big = cube_sites(ix, x, 2 * l0)?;
    let threshold = 0.75 * params.m * (params.l0 as f64).powi(ix.dim() as i32);
    let mut big_uf = UnionFind::new(ix.len());
    local_union(occ, edges, ix, x, 2 * l0, rule.connectivity, &mut big_uf, &big);
    let corners = subbox_corners(x, l0);
    // per subbox, the big-box labels of its qualifying components
    let mut qualifying: Vec<Vec<usize>> = Vec::with_capacity(corners.len());
    for corner in &corners {
        let sites = cube_sites(ix, corner, l0)?;
        let mut uf = UnionFind::new(ix.len());
        local_union(occ, edges, ix, corner, l0, rule.connectivity, &mut uf, &sites);
        let mut count: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for &a in &sites {
            if occ.get(a) {
                *count.entry(uf.find(a)).or_insert(0) += 1;
            }
        }
        let labels: Vec<usize> = count
            .into_iter()
            .filter(|(_, size)| *size as f64 >= threshold)
            .map(|(root, _)| big_uf.find(root))
            .collect();
        if labels.is_empty() {
            return Ok(false);
        }
        qualifying.push(labels);
    }
    Ok(match rule.selection {
        SeedSelection::AllQualifying => {
            let first = qualifying[0][0];
            qualifying.iter().flatten().all(|l| *l == first)
        }
        SeedSelection::AnyChoice => qualifying[0].iter().any(|l| qualifying[1..].iter().all(|q| q.contains(l))),
    })
}

/// `F_x`: every subbox holds at most `(5/4) m L₀^d` occupied sites.
pub fn seed_f(sample: &InterlacementSample, ix: &BoxIndexer, x: &Point, params: &SeedEventParams) -> Result<bool> {
    seed_f_raw(&sample.occupancy, ix, x.coords(), params)
}

pub fn seed_f_raw(occ: &Bitset, ix: &BoxIndexer, x: &[i32], params: &SeedEventParams) -> Result<bool> {
    check_len(occ, ix)?;
    let l0 = params.l0 as i32;
    cube_sites(ix, x, 2 * l0)?;
    let limit = 1.25 * params.m * (params.l0 as f64).powi(ix.dim() as i32);
    for corner in subbox_corners(x, l0) {
        let n = cube_sites(ix, &corner, l0)?.into_iter().filter(|&a| occ.get(a)).count();
        if n as f64 > limit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `G_x`: `𝒱₂ ∩ (x + [0,2L₀)^d) = ∅`.
pub fn seed_g_empty(sample2: &InterlacementSample, ix: &BoxIndexer, x: &Point, l0: u32) -> Result<bool> {
    seed_g_raw(&sample2.occupancy, ix, x.coords(), l0)
}

pub fn seed_g_raw(occ: &Bitset, ix: &BoxIndexer, x: &[i32], l0: u32) -> Result<bool> {
    check_len(occ, ix)?;
    Ok(cube_sites(ix, x, 2 * l0 as i32)?.into_iter().all(|a| occ.get(a)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodVertexField {
    /// Corner of grid vertex 0.
    pub origin: Vec<i32>,
    pub stride: u32,
    /// Grid extent per dimension.
    pub shape: Vec<usize>,
    /// Row-major (first dimension most significant).
    pub good: Vec<bool>,
}

impl GoodVertexField {
    pub fn from_values(origin: Vec<i32>, stride: u32, shape: Vec<usize>, good: Vec<bool>) -> Result<Self> {
        if shape.iter().product::<usize>() != good.len() {
            return Err(Error::InvalidArgument("grid shape does not match values".into()));
        }
        Ok(GoodVertexField { origin, stride, shape, good })
    }

    fn strides(&self) -> Vec<usize> {
        let d = self.shape.len();
        let mut s = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.shape[k + 1];
        }
        s
    }

    /// Nearest-neighbor path of good vertices from index 0 to the last
    /// index along dimension 0.
    pub fn crossing(&self) -> bool {
        if self.good.is_empty() {
            return false;
        }
        let strides = self.strides();
        let d = self.shape.len();
        let last0 = self.shape[0] - 1;
        let mut seen = vec![false; self.good.len()];
        let mut queue = VecDeque::new();
        for i in 0..self.good.len() {
            if i / strides[0] == 0 && self.good[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            if i / strides[0] == last0 {
                return true;
            }
            for k in 0..d {
                let pos = (i / strides[k]) % self.shape[k];
                if pos + 1 < self.shape[k] {
                    let j = i + strides[k];
                    if self.good[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
                if pos > 0 {
                    let j = i - strides[k];
                    if self.good[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        false
    }
}

/// `E_x ∩ F_x ∩ G_x` on the grid `x ∈ L₀ℤ^d` with `x + [0,2L₀)^d` inside the
/// window. `E`, `F` use `sample1`, `G` uses `sample2`.
pub fn good_vertex_field(
    sample1: &InterlacementSample,
    sample2: &InterlacementSample,
    params: &SeedEventParams,
    rule: SeedRule,
) -> Result<GoodVertexField> {
    if !sample1.window.same_window(&sample2.window) {
        return Err(Error::WindowMismatch("pair samples differ in window".into()));
    }
    let ix = BoxIndexer::new(sample1.window.dim, sample1.window.radius);
    let d = ix.dim();
    let r = ix.radius() as i32;
    let l0 = params.l0 as i32;
    // smallest multiple of L0 that is >= -r, largest with x + 2L0 - 1 <= r
    let lo = (-r).div_euclid(l0) * l0 + if (-r).rem_euclid(l0) == 0 { 0 } else { l0 };
    let hi = (r - 2 * l0 + 1).div_euclid(l0) * l0;
    if hi < lo {
        return Err(Error::Geometry(format!("window radius {r} too small for L0 = {l0}")));
    }
    let per = ((hi - lo) / l0 + 1) as usize;
    let shape = vec![per; d];
    let total = per.pow(d as u32);
    let mut good = Vec::with_capacity(total);
    let mut x = vec![0i32; d];
    for i in 0..total {
        let mut rem = i;
        for k in (0..d).rev() {
            x[k] = lo + (rem % per) as i32 * l0;
            rem /= per;
        }
        let g = seed_g_raw(&sample2.occupancy, &ix, &x, params.l0)?
            && seed_f_raw(&sample1.occupancy, &ix, &x, params)?
            && seed_e_raw(&sample1.occupancy, &sample1.edges, &ix, &x, params, rule)?;
        good.push(g);
    }
    GoodVertexField::from_values(vec![lo; d], params.l0, shape, good)
}

/// When the good-vertex field crosses along dimension 0, checks that `𝒦`
/// has a component inside the covered region meeting both the slab
/// `x₀ < g_min + L₀` and the slab `x₀ >= g_max + L₀`. Returns `None` when
/// the field does not cross, otherwise whether the implication holds.
pub fn good_crossing_implies_k_crossing(field: &GoodVertexField, pair: &PairConfiguration) -> Result<Option<bool>> {
    if !field.crossing() {
        return Ok(None);
    }
    let ix = BoxIndexer::new(pair.window.dim, pair.window.radius);
    let d = ix.dim();
    let l0 = field.stride as i32;
    let gmin = field.origin[0];
    let gmax = field.origin[0] + (field.shape[0] as i32 - 1) * l0;
    let hi: Vec<i32> = (0..d).map(|k| field.origin[k] + (field.shape[k] as i32 - 1) * l0 + 2 * l0 - 1).collect();
    let in_region = |c: &[i32]| (0..d).all(|k| c[k] >= field.origin[k] && c[k] <= hi[k]);
    let mut region = Bitset::new(ix.len());
    let mut c = vec![0i32; d];
    for a in pair.occupancy_k.iter_ones() {
        ix.coords_of(a, &mut c);
        if in_region(&c) {
            region.set(a);
        }
    }
    let report = components(&region, &ix, Adjacency::Nearest)?;
    let mut left = std::collections::HashSet::new();
    let mut right = std::collections::HashSet::new();
    for a in region.iter_ones() {
        ix.coords_of(a, &mut c);
        if c[0] < gmin + l0 {
            left.insert(report.labels[a]);
        }
        if c[0] >= gmax + l0 {
            right.insert(report.labels[a]);
        }
    }
    Ok(Some(left.iter().any(|l| right.contains(l))))
}

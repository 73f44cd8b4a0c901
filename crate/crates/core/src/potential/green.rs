//! Lattice Green function `G(0,x) = ∫₀^∞ e^{-u} ∏ I_{x_i}(u/d) du`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bessel::scaled_bessel_i_seq;
use super::quadrature::integrate_half_line_vec;
use crate::error::{Error, Result};
use crate::lattice::Point;

pub const DEFAULT_TOL: f64 = 1e-10;
const CACHE_FORMAT_VERSION: u32 = 1;

/// Canonical representative under signed coordinate permutations: absolute
/// values sorted ascending.
pub fn canonical(x: &[i32]) -> Vec<i32> {
    let mut c: Vec<i32> = x.iter().map(|v| v.abs()).collect();
    c.sort_unstable();
    c
}

fn check_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("the Green function is finite only for d >= 3, got d = {d}")));
    }
    Ok(())
}

/// Evaluates `G(0,x)` for many displacements at once; all share the
/// quadrature nodes and one Bessel sequence per node.
pub fn green_many(points: &[Vec<i32>], d: usize, tol: f64) -> Result<Vec<f64>> {
    check_dim(d)?;
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let abs: Vec<Vec<usize>> = points.iter().map(|p| p.iter().map(|c| c.unsigned_abs() as usize).collect()).collect();
    let nmax = abs.iter().flatten().copied().max().unwrap_or(0);
    let mut seq = vec![0.0; nmax + 1];
    let inv_d = 1.0 / d as f64;
    integrate_half_line_vec(points.len(), tol, |u, out| {
        scaled_bessel_i_seq(u * inv_d, &mut seq);
        for (o, p) in out.iter_mut().zip(&abs) {
            *o = p.iter().map(|&k| seq[k]).product();
        }
    })
}

/// `G(0,x)` in dimension `d` to absolute accuracy `tol`.
pub fn green(x: &Point, d: usize, tol: f64) -> Result<f64> {
    Ok(green_many(&[x.coords().to_vec()], d, tol)?[0])
}

/// Cache of Green values keyed by canonical displacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenTable {
    dim: usize,
    tol: f64,
    #[serde(with = "entries")]
    values: BTreeMap<Vec<i32>, f64>,
}

mod entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<i32>, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(&Vec<i32>, &f64)> = m.iter().collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Vec<i32>, f64>, D::Error> {
        let v: Vec<(Vec<i32>, f64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    table: GreenTable,
}

impl GreenTable {
    pub fn new(dim: usize, tol: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Ok(GreenTable { dim, tol, values: BTreeMap::new() })
    }

    /// All displacements with `|x|∞ <= radius`.
    pub fn ball(dim: usize, radius: u32, tol: f64) -> Result<Self> {
        let mut t = GreenTable::new(dim, tol)?;
        let mut reps = Vec::new();
        let mut cur = vec![0i32; dim];
        sorted_tuples(dim, radius as i32, 0, 0, &mut cur, &mut reps);
        t.insert_canonical(reps)?;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Computes and stores every listed displacement not yet cached.
    pub fn ensure(&mut self, points: &[Point]) -> Result<()> {
        let mut want: Vec<Vec<i32>> = Vec::new();
        for p in points {
            if p.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
            }
            let c = canonical(p.coords());
            if !self.values.contains_key(&c) {
                want.push(c);
            }
        }
        want.sort();
        want.dedup();
        self.insert_canonical(want)
    }

    fn insert_canonical(&mut self, reps: Vec<Vec<i32>>) -> Result<()> {
        let vals = green_many(&reps, self.dim, self.tol)?;
        self.values.extend(reps.into_iter().zip(vals));
        Ok(())
    }

    pub fn get_coords(&self, x: &[i32]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        self.values.get(&canonical(x)).copied().ok_or_else(|| Error::GreenCoverage(x.to_vec()))
    }

    pub fn get(&self, x: &Point) -> Result<f64> {
        self.get_coords(x.coords())
    }

    /// `G(x,y) = G(0, y - x)`.
    pub fn between(&self, x: &Point, y: &Point) -> Result<f64> {
        self.get(&y.sub(x))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i32>, f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    /// `G(0,x) - 1{x=0} - (1/2d) Σ_e G(0,x+e)`.
    pub fn harmonic_residual(&self, x: &Point) -> Result<f64> {
        let mut s = 0.0;
        for y in crate::lattice::neighbors(x, crate::lattice::Adjacency::Nearest) {
            s += self.get(&y)?;
        }
        let delta = if x.coords().iter().all(|c| *c == 0) { 1.0 } else { 0.0 };
        Ok(self.get(x)? - delta - s / (2.0 * self.dim as f64))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = CacheFile { format_version: CACHE_FORMAT_VERSION, table: self.clone() };
        std::fs::write(path, serde_json::to_vec(&file)?)?;
        Ok(())
    }

    /// Loads a cache and checks it was built for `(dim, tol)`.
    pub fn load_json(path: &Path, dim: usize, tol: f64) -> Result<Self> {
        let file: CacheFile = serde_json::from_slice(&std::fs::read(path)?)?;
        if file.format_version != CACHE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "green cache format {} (expected {CACHE_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.table.dim != dim || file.table.tol != tol {
            return Err(Error::Format(format!(
                "green cache keyed by (d={}, tol={:e}), requested (d={dim}, tol={tol:e})",
                file.table.dim, file.table.tol
            )));
        }
        Ok(file.table)
    }

    /// Dense lookup over `|x|∞ <= radius`; uncached entries are NaN.
    pub fn to_dense(&self, radius: u32) -> DenseGreen {
        let side = radius as usize + 1;
        let mut strides = vec![1usize; self.dim];
        for k in 1..self.dim {
            strides[k] = strides[k - 1] * side;
        }
        let mut values = vec![f64::NAN; side.pow(self.dim as u32)];
        let mut cur = vec![0i32; self.dim];
        for (idx, v) in values.iter_mut().enumerate() {
            let mut rem = idx;
            for c in cur.iter_mut() {
                *c = (rem % side) as i32;
                rem /= side;
            }
            if let Some(g) = self.values.get(&canonical(&cur)) {
                *v = *g;
            }
        }
        DenseGreen { dim: self.dim, radius: radius as i32, strides, values }
    }
}

fn sorted_tuples(dim: usize, max: i32, pos: usize, lo: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if pos == dim {
        out.push(cur.clone());
        return;
    }
    for v in lo..=max {
        cur[pos] = v;
        sorted_tuples(dim, max, pos + 1, v, cur, out);
    }
}

/// Array-backed Green lookup indexed by absolute coordinates.
#[derive(Clone, Debug)]
pub struct DenseGreen {
    dim: usize,
    radius: i32,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl DenseGreen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u32 {
        self.radius as u32
    }

    /// NaN when `x` is outside the table.
    #[inline]
    pub fn get(&self, x: &[i32]) -> f64 {
        let mut idx = 0;
        for (c, s) in x.iter().zip(&self.strides) {
            let a = c.abs();
            if a > self.radius {
                return f64::NAN;
            }
            idx += a as usize * s;
        }
        self.values[idx]
    }

    pub fn get_checked(&self, x: &[i32]) -> Result<f64> {
        let v = self.get(x);
        if v.is_nan() {
            Err(Error::GreenCoverage(x.to_vec()))
        } else {
            Ok(v)
        }
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| !v.is_nan())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeBox;

    // Watson's closed form for the simple cubic lattice:
    // G(0,0) = (sqrt(6)/(32 pi^3)) Γ(1/24) Γ(5/24) Γ(7/24) Γ(11/24).
    const WATSON_G0: f64 = 1.516_386_059_151_978;

    #[test]
    fn origin_value_d3() {
        let g = green(&Point::origin(3), 3, 1e-12).unwrap();
        assert!((g - WATSON_G0).abs() < 1e-11, "{g}");
    }

    #[test]
    fn first_neighbor_from_harmonic_identity() {
        let g0 = green(&Point::origin(3), 3, 1e-12).unwrap();
        let g1 = green(&Point::unit(3, 0), 3, 1e-12).unwrap();
        assert!((g1 - (g0 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn harmonic_and_symmetric_on_small_ball() {
        let t = GreenTable::ball(3, 4, DEFAULT_TOL).unwrap();
        for x in LatticeBox::centered(3, 3).points() {
            assert!(t.harmonic_residual(&x).unwrap().abs() <= 1e-8);
        }
        let a = t.get(&Point::new(vec![1, -2, 3])).unwrap();
        let b = t.get(&Point::new(vec![-3, 1, 2])).unwrap();
        assert_eq!(a, b);
        assert!(t.get(&Point::new(vec![5, 0, 0])).is_err());
    }

    #[test]
    fn lower_bound_along_axis() {
        let t = GreenTable::ball(3, 3, DEFAULT_TOL).unwrap();
        let c = LatticeBox::centered(3, 2)
            .points()
            .into_iter()
            .filter(|p| p.linf_norm() > 0)
            .map(|p| t.get(&p).unwrap() * p.linf_norm() as f64)
            .fold(f64::INFINITY, f64::min);
        let g3 = t.get(&Point::new(vec![3, 0, 0])).unwrap();
        assert!(g3 >= c / 3.0);
    }

    #[test]
    fn dense_matches_table_and_json_roundtrip() {
        let t = GreenTable::ball(4, 2, 1e-9).unwrap();
        let dense = t.to_dense(2);
        assert!(dense.is_complete());
        assert_eq!(dense.get(&[-2, 1, 0, 2]), t.get_coords(&[2, 2, 1, 0]).unwrap());
        assert!(dense.get(&[3, 0, 0, 0]).is_nan());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        t.save_json(&path).unwrap();
        assert_eq!(GreenTable::load_json(&path, 4, 1e-9).unwrap(), t);
        assert!(GreenTable::load_json(&path, 4, 1e-10).is_err());
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(green(&Point::origin(2), 2, 1e-8).is_err());
    }
}

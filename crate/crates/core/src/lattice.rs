//! Integer-lattice geometry.
//!
//! Points carry their own dimension; every function that combines points
//! validates that the dimensions agree. Boxes are closed `l∞` balls
//! `B(x, N) = { y : |y - x|∞ <= N }`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<i32>);

impl Point {
    pub fn new(coords: Vec<i32>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0; dim])
    }

    /// The unit vector `e_k` (zero-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i32> {
        self.0
    }

    pub fn linf_norm(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: i32) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn linf_dist(&self, other: &Point) -> i32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }

    pub fn l1_dist(&self, other: &Point) -> i32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Parses `"1,0,-2"`.
    pub fn parse(s: &str) -> Result<Point> {
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<i32>().map_err(|e| Error::InvalidArgument(format!("bad coordinate {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::InvalidArgument("empty point".into()));
        }
        Ok(Point(coords))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i32>> for Point {
    fn from(v: Vec<i32>) -> Self {
        Point(v)
    }
}

/// Neighborhood relation on `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    /// `|x - y|_1 = 1`.
    Nearest,
    /// `|x - y|∞ = 1`.
    Star,
}

pub fn neighbors(p: &Point, mode: Adjacency) -> Vec<Point> {
    let d = p.dim();
    match mode {
        Adjacency::Nearest => {
            let mut out = Vec::with_capacity(2 * d);
            for k in 0..d {
                for s in [1, -1] {
                    let mut c = p.0.clone();
                    c[k] += s;
                    out.push(Point(c));
                }
            }
            out
        }
        Adjacency::Star => {
            let total = 3usize.pow(d as u32);
            let mut out = Vec::with_capacity(total - 1);
            for code in 0..total {
                let mut rem = code;
                let mut c = p.0.clone();
                let mut zero = true;
                for ck in c.iter_mut() {
                    let off = (rem % 3) as i32 - 1;
                    rem /= 3;
                    if off != 0 {
                        zero = false;
                    }
                    *ck += off;
                }
                if !zero {
                    out.push(Point(c));
                }
            }
            out
        }
    }
}

/// `{ x in K : some nearest neighbor of x lies outside K }`, sorted.
pub fn inner_boundary(set: &[Point]) -> Vec<Point> {
    let lookup: HashSet<&Point> = set.iter().collect();
    let mut out: Vec<Point> =
        set.iter().filter(|x| neighbors(x, Adjacency::Nearest).iter().any(|y| !lookup.contains(y))).cloned().collect();
    out.sort();
    out.dedup();
    out
}

/// Closed `l∞` ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub center: Point,
    pub radius: u32,
}

impl LatticeBox {
    pub fn new(center: Point, radius: u32) -> Self {
        LatticeBox { center, radius }
    }

    pub fn centered(dim: usize, radius: u32) -> Self {
        LatticeBox::new(Point::origin(dim), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, y: &Point) -> bool {
        y.dim() == self.dim() && y.linf_dist(&self.center) <= self.radius as i32
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<Point> {
        let d = self.dim();
        let r = self.radius as i32;
        let side = self.side();
        let mut out = Vec::with_capacity(self.len());
        let mut offs = vec![-r; d];
        for _ in 0..self.len() {
            out.push(Point(offs.iter().zip(self.center.coords()).map(|(o, c)| o + c).collect()));
            for k in (0..d).rev() {
                offs[k] += 1;
                if offs[k] <= r {
                    break;
                }
                offs[k] = -r;
            }
        }
        debug_assert_eq!(out.len(), side.pow(d as u32));
        out
    }

    /// Inner boundary without building a set: points with some coordinate
    /// offset equal to `±radius`.
    pub fn inner_boundary(&self) -> Vec<Point> {
        let r = self.radius as i32;
        self.points()
            .into_iter()
            .filter(|p| p.coords().iter().zip(self.center.coords()).any(|(a, c)| (a - c).abs() == r))
            .collect()
    }
}

/// Disc in the plane `y3 = x3` (d = 3 only).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscSpec {
    pub center: Point,
    pub halfwidth: u32,
    /// `D+(x, M)`: the quarter `x1 <= y1 <= x1 + M`, `x2 <= y2 <= x2 + M`.
    pub quarter: bool,
}

pub fn enumerate_disc(spec: &DiscSpec) -> Result<Vec<Point>> {
    if spec.center.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: spec.center.dim() });
    }
    let m = spec.halfwidth as i32;
    let c = spec.center.coords();
    let lo = if spec.quarter { 0 } else { -m };
    let mut out = Vec::new();
    for a in lo..=m {
        for b in lo..=m {
            out.push(Point(vec![c[0] + a, c[1] + b, c[2]]));
        }
    }
    Ok(out)
}

/// Dense indexing of the sites of `B(0, radius)`. Site indices follow the
/// lexicographic order of points (first coordinate most significant), so the
/// minimal index of a set is its lexicographically minimal point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxIndexer {
    dim: usize,
    radius: i32,
    side: usize,
    strides: Vec<usize>,
    len: usize,
}

impl BoxIndexer {
    pub fn new(dim: usize, radius: u32) -> Self {
        let side = 2 * radius as usize + 1;
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * side;
        }
        BoxIndexer { dim, radius: radius as i32, side, strides, len: side.pow(dim as u32) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u32 {
        self.radius as u32
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn contains_coords(&self, c: &[i32]) -> bool {
        c.iter().all(|x| x.abs() <= self.radius)
    }

    pub fn index_of(&self, c: &[i32]) -> Option<usize> {
        if c.len() != self.dim || !self.contains_coords(c) {
            return None;
        }
        Some(self.index_unchecked(c))
    }

    pub fn index_unchecked(&self, c: &[i32]) -> usize {
        c.iter().zip(&self.strides).map(|(x, s)| (x + self.radius) as usize * s).sum()
    }

    pub fn coords_of(&self, mut idx: usize, out: &mut [i32]) {
        for k in 0..self.dim {
            out[k] = (idx / self.strides[k]) as i32 - self.radius;
            idx %= self.strides[k];
        }
    }

    pub fn point_of(&self, idx: usize) -> Point {
        let mut c = vec![0; self.dim];
        self.coords_of(idx, &mut c);
        Point(c)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Whether site `idx` is on the inner boundary of the box.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let mut rem = idx;
        for k in 0..self.dim {
            let q = rem / self.strides[k];
            rem %= self.strides[k];
            if q == 0 || q == self.side - 1 {
                return true;
            }
        }
        false
    }
}

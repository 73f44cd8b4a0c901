//! Equilibrium measures and capacities from the last-exit system
//! `Σ_{y ∈ ∂ᵢK} G(x,y) e(y) = 1`, `x ∈ ∂ᵢK`.

use std::collections::{BTreeMap, BTreeSet};

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::green::GreenTable;
use crate::error::{Error, Result};
use crate::lattice::{inner_boundary, Point};

pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// LU factorization of the Green matrix on a set of boundary points.
pub struct BoundarySystem {
    points: Vec<Point>,
    lu: PartialPivLu<f64>,
    pivot_ratio: f64,
    residual: f64,
    equilibrium: Vec<f64>,
}

impl BoundarySystem {
    /// Factorizes `[G(p_i, p_j)]` and solves for the equilibrium vector.
    /// `green(z)` returns `G(0,z)`.
    pub fn new<F>(points: Vec<Point>, green: F, residual_tol: f64) -> Result<Self>
    where
        F: Fn(&[i32]) -> Result<f64>,
    {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty boundary".into()));
        }
        let d = points[0].dim();
        let mut a = Mat::<f64>::zeros(n, n);
        let mut diff = vec![0i32; d];
        for j in 0..n {
            let pj = points[j].coords();
            for i in 0..n {
                let pi = points[i].coords();
                for k in 0..d {
                    diff[k] = pj[k] - pi[k];
                }
                a[(i, j)] = green(&diff)?;
            }
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let v = u[(i, i)].abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        let ones = Mat::<f64>::from_fn(n, 1, |_, _| 1.0);
        let e = lu.solve(&ones);
        let r = &a * &e - &ones;
        let mut residual = 0.0f64;
        for i in 0..n {
            residual = residual.max(r[(i, 0)].abs());
        }
        if !(residual <= residual_tol) {
            return Err(Error::Solve { residual, pivot_ratio, size: n });
        }
        let equilibrium: Vec<f64> = (0..n).map(|i| e[(i, 0)]).collect();
        Ok(BoundarySystem { points, lu, pivot_ratio, residual, equilibrium })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    /// Solves `G X = B` column by column.
    pub fn solve(&self, rhs: &Mat<f64>) -> Mat<f64> {
        self.lu.solve(rhs)
    }
}

/// Equilibrium measure and capacity of a finite set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// The set `K`, sorted.
    pub set: Vec<Point>,
    /// `(x, e_K(x))` over the inner boundary, sorted by point.
    pub equilibrium: Vec<(Point, f64)>,
    pub capacity: f64,
    /// Max-norm residual of the last-exit system.
    pub residual: f64,
    pub pivot_ratio: f64,
}

impl CapacityResult {
    /// `e_K(x)`, zero off the inner boundary.
    pub fn mass(&self, x: &Point) -> f64 {
        self.equilibrium.binary_search_by(|(p, _)| p.cmp(x)).map(|i| self.equilibrium[i].1).unwrap_or(0.0)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.set.binary_search(x).is_ok()
    }
}

fn normalize_set(k: &[Point]) -> Result<Vec<Point>> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("capacity of the empty set".into()));
    }
    let d = k[0].dim();
    if let Some(p) = k.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
    }
    let set: BTreeSet<Point> = k.iter().cloned().collect();
    Ok(set.into_iter().collect())
}

/// Capacity with Green values from an arbitrary lookup.
pub fn capacity_with<F>(k: &[Point], green: F) -> Result<CapacityResult>
where
    F: Fn(&[i32]) -> Result<f64>,
{
    let set = normalize_set(k)?;
    let boundary = inner_boundary(&set);
    let sys = BoundarySystem::new(boundary, green, SOLVE_RESIDUAL_TOL)?;
    capacity_from_system(set, &sys)
}

pub fn capacity_from_system(set: Vec<Point>, sys: &BoundarySystem) -> Result<CapacityResult> {
    let mut equilibrium = Vec::with_capacity(sys.len());
    for (p, e) in sys.points().iter().zip(sys.equilibrium()) {
        if *e < -1e-9 {
            return Err(Error::Consistency(format!("negative equilibrium mass {e:e} at {p:?}")));
        }
        equilibrium.push((p.clone(), e.max(0.0)));
    }
    equilibrium.sort_by(|a, b| a.0.cmp(&b.0));
    let capacity = crate::stats::neumaier_sum(equilibrium.iter().map(|(_, e)| *e));
    Ok(CapacityResult { set, equilibrium, capacity, residual: sys.residual(), pivot_ratio: sys.pivot_ratio() })
}

pub fn capacity(k: &[Point], greens: &GreenTable) -> Result<CapacityResult> {
    capacity_with(k, |z| greens.get_coords(z))
}

/// Capacity with a Green table extended on demand to every needed
/// displacement.
pub fn capacity_auto(k: &[Point], greens: &mut GreenTable) -> Result<CapacityResult> {
    let set = normalize_set(k)?;
    let boundary = inner_boundary(&set);
    let mut disp: BTreeMap<Vec<i32>, ()> = BTreeMap::new();
    for x in &boundary {
        for y in &boundary {
            disp.insert(super::green::canonical(y.sub(x).coords()), ());
        }
    }
    let pts: Vec<Point> = disp.into_keys().map(Point::new).collect();
    greens.ensure(&pts)?;
    capacity(&set, greens)
}

/// `P_x[H_K < ∞] = Σ_y G(x,y) e_K(y)` for `x ∉ K`.
pub fn hitting_probability(k: &[Point], x: &Point, cap: &CapacityResult, greens: &GreenTable) -> Result<f64> {
    hitting_probability_with(k, x, cap, |z| greens.get_coords(z))
}

pub fn hitting_probability_with<F>(k: &[Point], x: &Point, cap: &CapacityResult, green: F) -> Result<f64>
where
    F: Fn(&[i32]) -> Result<f64>,
{
    if k.contains(x) {
        return Err(Error::InvalidArgument(format!("{x:?} lies in K")));
    }
    let mut s = crate::stats::NeumaierSum::default();
    for (y, e) in &cap.equilibrium {
        s.add(green(y.sub(x).coords())? * e);
    }
    let h = s.value();
    if !(-1e-9..=1.0 + 1e-9).contains(&h) {
        return Err(Error::Consistency(format!("hitting probability {h} outside [0,1]")));
    }
    Ok(h.clamp(0.0, 1.0))
}

//! Random interlacements laboratory.
//!
//! Exact-marginal sampling of the interlacement set in a finite window of
//! `Z^d`, the intersection set `K = I1 ∩ I2` of two independent
//! interlacements and its complement `V`, percolation observables on them,
//! the renormalization/decoupling machinery, and the simple-random-walk and
//! hypercube experiments that feed it.
//!
//! Module map:
//!
//! * [`lattice`]: points, boxes, boundaries, discs.
//! * [`potential`]: Green function by Bessel quadrature, capacities,
//!   hypercube escape probabilities.
//! * [`walk`]: simple random walks, cut times, the `d = 3` path experiments.
//! * [`interlace`]: the finite-window sampler and the vacuum-law check.
//! * [`clusters`]: `K`/`V` construction, components, crossing and seed events.
//! * [`renorm`]: scales, hierarchical events, decoupling bounds, certificates.
//! * [`phase`]: crossing-probability grids and phase-curve bisection.
//! * [`hypercube`]: Bernoulli percolation on `{0,1}^d`, atoms, ubiquity.
//! * [`cli`]: command-line front end and run manifests.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bitset;
pub mod cli;
pub mod clusters;
pub mod error;
pub mod hypercube;
pub mod interlace;
pub mod lattice;
pub mod phase;
pub mod potential;
pub mod renorm;
pub mod report;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::Point;

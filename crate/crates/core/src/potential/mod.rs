//! Discrete potential theory on `Z^d`.

pub mod bessel;
pub mod capacity;
pub mod escape;
pub mod green;
pub mod quadrature;

pub use capacity::{
    capacity, capacity_auto, capacity_with, hitting_probability, hitting_probability_with, BoundarySystem,
    CapacityResult,
};
pub use escape::{escape_probability_hypercube, EscapeResult};
pub use green::{canonical, green, green_many, DenseGreen, GreenTable, DEFAULT_TOL};

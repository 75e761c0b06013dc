//! Numerical toolkit for log-Minkowski combinations of convex bodies:
//! polytope geometry, reflection-group chambers, cone-volume measures,
//! certified Wulff-shape volumes and a verification harness.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod l0;
pub mod linalg;
pub mod measures;
pub mod symmetry;

pub use error::{Error, Result};

//! Numerical laboratory for volume-difference inequalities of star and
//! convex bodies.
//!
//! Bodies are evaluation oracles ([`geometry::Body`]); all spherical and
//! Grassmannian integrals are seeded Monte Carlo estimates carrying a
//! standard error ([`stats::SampleEstimate`]), with closed forms used and
//! flagged wherever the family has one.

pub mod certificates;
pub mod constants;
pub mod density;
pub mod error;
pub mod geometry;
pub mod lab;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod sphere;
pub mod stats;
mod text;
pub mod volumetrics;

pub use error::{Error, Result};
pub use geometry::{Body, BodySpec, Direction, Subspace};
pub use rng::RngStream;
pub use stats::SampleEstimate;

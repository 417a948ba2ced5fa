//! Hyperbolicity testing for real homogeneous polynomials.
//!
//! Three independent certification routes (Hermite forms, real/imaginary
//! resultants, Nuij-path discriminants) share an exact rational polynomial
//! layer, an embedded semidefinite feasibility solver, and a randomized
//! falsifier whose witnesses are confirmed in exact arithmetic.

pub mod certify;
pub mod corpus;
pub mod error;
pub mod hermite;
pub mod intersection;
pub mod nuij;
pub mod polyring;
pub mod sampler;
pub mod structmats;
pub mod verdict;

pub use error::{Error, Result};
pub use polyring::{parse_poly, MultiPoly, Point};

//! Warped product decompositions of pseudo-Euclidean space `E^n_nu` and its
//! central hyperquadrics, together with the spherical submanifolds, circles,
//! and paraboloid-model isometries underpinning them.
//!
//! The crate is generic over the floating-point scalar (see [`scalar::Scalar`]);
//! the aliases below fix `f64`, which all stated tolerances assume.

pub mod circles;
mod dense;
pub mod error;
pub mod isometry;
pub mod pseudo_linear;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod spheres;
pub mod validation;
pub mod warp;

pub use error::{GeomError, ImageViolation, Result};
pub use pseudo_linear::{CausalClass, LinearMap, Space, Subspace, Vector};
pub use scalar::Scalar;

/// `f64` aliases for the main types.
pub type Vec64 = pseudo_linear::Vector<f64>;
pub type Subspace64 = pseudo_linear::Subspace<f64>;
pub type LinearMap64 = pseudo_linear::LinearMap<f64>;
pub type SphereData64 = spheres::SphereInitialData<f64>;
pub type Sphere64 = spheres::SphericalSubmanifold<f64>;
pub type InitialData64 = warp::InitialData<f64>;
pub type Decomposition64 = warp::WarpedDecomposition<f64>;
pub type Restricted64 = warp::RestrictedDecomposition<f64>;
pub type WarpedPoint64 = warp::WarpedPoint<f64>;
pub type CircleState64 = circles::CircleState<f64>;
pub type ParaboloidEmbedding64 = isometry::ParaboloidEmbedding<f64>;
pub type ParaboloidIsometry64 = isometry::ParaboloidIsometry<f64>;

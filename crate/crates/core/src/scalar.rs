//! Scalar abstraction for the whole crate.
//!
//! All geometry is generic over a floating-point scalar implementing
//! [`Scalar`]; `f32` and `f64` are the two provided models. The concrete
//! type aliases at the crate root fix `f64`, which is what every stated
//! tolerance in this crate is calibrated for.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + 'static {
    /// Shorthand for converting an `f64` literal (tolerances, constants).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in this scalar type")
    }

    /// Shorthand for converting a `usize` (dimension counts entering formulas).
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable in this scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Crate-wide tolerance constants, converted at the use site via [`Scalar::lit`].
pub mod tol {
    /// Causal classification and degeneracy tolerance (relative).
    pub const CLASS: f64 = 1e-9;
    /// Convergence threshold for the cyclic Jacobi eigenvalue sweep.
    pub const JACOBI: f64 = 1e-12;
    /// Default membership tolerance for point-on-submanifold checks (relative).
    pub const MEMBERSHIP: f64 = 1e-9;
    /// Inversion refuses points closer than this to the image boundary.
    pub const NEAR_BOUNDARY: f64 = 1e-7;
    /// Agreement required between the master and expanded forms of the
    /// decomposition map.
    pub const FORM_AGREEMENT: f64 = 1e-10;
}

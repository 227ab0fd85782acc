use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar backing every coefficient, angle and coordinate in the crate.
///
/// Implemented for `f32` and `f64`. The pruning threshold and comparison
/// tolerances scale with the precision of the type.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Coefficients below this modulus are dropped after every algebra operation.
    fn default_prune() -> Self;

    /// Relative tolerance used by "equal after pruning" comparisons.
    fn default_rel_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Scalar for f64 {
    fn default_prune() -> Self {
        1e-13
    }
    fn default_rel_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn default_prune() -> Self {
        1e-5
    }
    fn default_rel_tol() -> Self {
        1e-4
    }
}

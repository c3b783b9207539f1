//! Scalar abstraction for the geometric core.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by the pose algebra (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal, panicking only if it is unrepresentable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for rank and degeneracy decisions.
    fn rank_tolerance() -> Self;
}

impl Real for f32 {
    fn rank_tolerance() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn rank_tolerance() -> Self {
        1e-10
    }
}

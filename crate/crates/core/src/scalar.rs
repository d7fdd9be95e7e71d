//! Scalar abstractions.
//!
//! [`Scalar`] covers every number type the crate computes with, including
//! exact big rationals. [`Real`] narrows that to IEEE floats, which is what
//! the dense linear algebra and the statistics need.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// A number type closed under field operations: `f32`, `f64` or an exact rational.
pub trait Scalar: Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug {
    /// Lossy conversion from `f64`. Exact types take the nearest representable value.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite value representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug
{
}

/// Floating point scalars: `f32` or `f64`.
pub trait Real: Scalar + Float + Copy + Display + Send + Sync + Default + 'static {
    /// Shorthand for converting literal constants.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal fits")
    }
}

impl Real for f32 {}
impl Real for f64 {}

//! Floating point abstraction shared by the geometry and overlap code.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the generic geometry layer.
///
/// Implemented for `f32` and `f64`. The numeric tolerances quoted throughout
/// the crate (1e-12 rad, 1e-9 px) are only attainable with `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(v: f64) -> Self;

    /// Widens to `f64`.
    fn as_f64(self) -> f64;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::TAU();
    let shifted = a + T::PI();
    let mut w = shifted - two_pi * (shifted / two_pi).floor() - T::PI();
    // floor rounding can land exactly on +pi
    if w >= T::PI() {
        w = w - two_pi;
    }
    if w < -T::PI() {
        w = -T::PI();
    }
    w
}

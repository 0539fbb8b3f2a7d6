//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the physics kernels are generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot represent it at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn tau() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::tau();
    let pi = T::PI();
    let mut w = a - tau * ((a + pi) / tau).floor();
    // floor-based reduction lands in [-π, π); move the left endpoint over
    if w <= -pi {
        w = w + tau;
    }
    w
}

/// Nearest integer with ties going to the even neighbour.
pub fn round_half_even<T: Real>(x: T) -> T {
    let r = x.round();
    let half = T::lit(0.5);
    if (x - x.trunc()).abs() == half {
        let two = T::lit(2.0);
        two * (x / two).round()
    } else {
        r
    }
}

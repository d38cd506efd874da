//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the deterministic numerics are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline(always)]
pub(crate) fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// `x^p` for `x >= 0`, with an exact zero returned for vanishing `x` when `p > 0`.
#[inline]
pub(crate) fn pow_nonneg<T: Real>(x: T, p: T) -> T {
    if x <= T::min_positive_value() {
        if p > T::zero() {
            T::zero()
        } else if p == T::zero() {
            T::one()
        } else {
            T::infinity()
        }
    } else {
        x.powf(p)
    }
}

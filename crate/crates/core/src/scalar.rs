//! Scalar abstractions.
//!
//! Floating-point code is written against [`Real`] so that every measure,
//! partition and distance can be instantiated at `f32` or `f64`. Exact
//! bookkeeping (martingale identities) uses [`ExactScalar`], which is
//! satisfied by `num_rational::Ratio` as well as the float types.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating-point scalar used throughout the numerical core.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Absolute tolerance used where a check is nominally `1e-12`, widened
    /// to a few ulps of one for low-precision types.
    fn mass_tolerance() -> Self {
        lit::<Self>(1e-12).max(Self::epsilon() * lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field arithmetic without transcendental functions.
pub trait ExactScalar: Num + Clone + PartialOrd + Debug {}

impl<S: Num + Clone + PartialOrd + Debug> ExactScalar for S {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

/// Widens `x` to `f64`.
#[inline]
pub fn wide<T: Real>(x: T) -> f64 {
    x.to_f64().expect("real converts to f64")
}

/// `x log x` with the convention `0 log 0 = 0`.
#[inline]
pub fn xlogx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

/// `log Σ exp(x_i)`, stable for large magnitudes. Empty input gives `-inf`.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max == T::infinity() {
        return max;
    }
    max + compensated_sum(values.iter().map(|&v| (v - max).exp())).ln()
}

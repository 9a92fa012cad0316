//! Floating point abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}

/// `(e^{x} - 1) / x`, continuous at `x = 0`.
pub fn expm1_over<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-5) {
        // 1 + x/2 + x^2/6 + x^3/24
        T::one() + x * (T::lit(0.5) + x * (T::lit(1.0 / 6.0) + x * T::lit(1.0 / 24.0)))
    } else {
        x.exp_m1() / x
    }
}

/// `(e^{-a t} - e^{-b t}) / (b - a)`, continuous at `a = b` where it equals `t e^{-a t}`.
pub fn decay_diff<T: Real>(a: T, b: T, t: T) -> T {
    let d = b - a;
    if (d * t).abs() < T::lit(0.5) {
        t * (-a * t).exp() * expm1_over(-d * t)
    } else {
        ((-a * t).exp() - (-b * t).exp()) / d
    }
}

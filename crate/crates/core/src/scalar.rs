//! The scalar abstraction every geometric routine is written against.
//!
//! Plain floats (`f32`, `f64`) and forward-mode dual numbers over them all
//! implement [`Scalar`], so a single evaluation path yields values and, when
//! instantiated with [`Dual`](crate::dual::Dual), exact directional
//! derivatives.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, One, Zero};

pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    fn from_f64(x: f64) -> Self;

    /// Real (primal) part as `f64`; for nested duals this is the innermost value.
    fn re(self) -> f64;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: Self) -> Self;

    /// `sin(x)/x`, smooth through the origin.
    fn sinc(self) -> Self {
        if self.re().abs() < 1e-4 {
            let x2 = self * self;
            Self::one() - x2 / Self::from_f64(6.0) + x2 * x2 / Self::from_f64(120.0)
        } else {
            self.sin() / self
        }
    }

    /// `(1 - cos x)/x^2`, smooth through the origin.
    fn cosc(self) -> Self {
        let s = (self * Self::from_f64(0.5)).sinc();
        Self::from_f64(0.5) * s * s
    }

    fn is_finite(self) -> bool;

    fn lift(values: &[f64]) -> Vec<Self> {
        values.iter().map(|&v| Self::from_f64(v)).collect()
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            #[inline]
            fn sin(self) -> Self {
                Float::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                Float::cos(self)
            }
            #[inline]
            fn tan(self) -> Self {
                Float::tan(self)
            }
            #[inline]
            fn exp(self) -> Self {
                Float::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                Float::ln(self)
            }
            #[inline]
            fn abs(self) -> Self {
                Float::abs(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                Float::powi(self, n)
            }
            #[inline]
            fn powf(self, p: Self) -> Self {
                Float::powf(self, p)
            }
            #[inline]
            fn is_finite(self) -> bool {
                Float::is_finite(self)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

/// Largest absolute real part in a slice.
pub fn max_abs<T: Scalar>(values: &[T]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.re().abs()))
}

pub fn to_f64<T: Scalar>(values: &[T]) -> Vec<f64> {
    values.iter().map(|v| v.re()).collect()
}

//! Scalar abstraction for costs, potentials and bounds.
//!
//! The dynamics only need field arithmetic and a total order on the values
//! that actually occur, so the engine runs unchanged over `f32`, `f64` and
//! exact rationals. Sampling and logarithmic bounds always go through `f64`.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Num, NumAssign};

/// Number type a game's costs are expressed in.
pub trait Scalar:
    Num + NumAssign + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Nearest representable value. Exact for the binary floats; the rational
    /// instance uses a continued-fraction approximation.
    fn from_f64(x: f64) -> Self;

    fn to_f64(self) -> f64;

    fn from_usize(k: usize) -> Self;

    /// `self` raised to a small nonnegative integer power.
    fn powi(self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc *= self;
        }
        acc
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
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn from_usize(k: usize) -> Self {
                k as $t
            }
            #[inline]
            fn powi(self, exp: u32) -> Self {
                <$t>::powi(self, exp as i32)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for Rational64 {
    fn from_f64(x: f64) -> Self {
        Rational64::approximate_float(x)
            .unwrap_or_else(|| panic!("{x} has no rational approximation"))
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn from_usize(k: usize) -> Self {
        Rational64::from_integer(k as i64)
    }
}

/// Largest of a nonempty sequence under `PartialOrd`.
pub(crate) fn max_of<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    values.into_iter().fold(None, |acc, v| match acc {
        Some(a) if a >= v => Some(a),
        _ => Some(v),
    })
}

pub(crate) fn min_of<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    values.into_iter().fold(None, |acc, v| match acc {
        Some(a) if a <= v => Some(a),
        _ => Some(v),
    })
}

//! Scalar abstraction for durations, distances and heuristic scores.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type used for every time-like quantity in the compiler: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is unrepresentable, which cannot
    /// happen for the finite constants used inside this crate.
    fn lit(value: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(value).expect("literal representable")
    }

    fn from_usize_lossy(value: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(value).unwrap_or_else(Self::infinity)
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Minimum of two scalars, treating NaN as larger than everything.
#[inline]
pub(crate) fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Scalar>::from_usize_lossy(7), 7.0);
        assert_eq!(min(3.0f64, f64::INFINITY), 3.0);
    }
}

//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! All metrics, losses, models and the optimizer are written against
//! [`Scalar`], so they run in `f32` or `f64`. The oracles in
//! [`crate::oracle`] are pinned to `f64` because their tolerances sit near
//! `1e-12`.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerically stable logistic function `1 / (1 + exp(-x))`.
#[inline]
pub fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Clamp `x` into `[lo, hi]`.
#[inline]
pub fn clamp<T: Scalar>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// Arithmetic mean of a slice, summed in index order. Empty slices give NaN.
pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / T::of_usize(xs.len())
}

/// `⌊n·frac⌋`, robust to the representation error of decimal fractions
/// (`0.29 * 100` must give 29, not 28).
pub fn floor_count(n: usize, frac: f64) -> usize {
    let raw = n as f64 * frac;
    let snapped = (raw + 1e-9 * raw.abs().max(1.0)).floor();
    if snapped <= 0.0 {
        0
    } else {
        snapped as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_symmetric_and_stable() {
        assert_eq!(logistic(0.0_f64), 0.5);
        assert!((logistic(3.0_f64) + logistic(-3.0_f64) - 1.0).abs() < 1e-15);
        assert_eq!(logistic(-800.0_f64), 0.0);
        assert_eq!(logistic(800.0_f64), 1.0);
        assert!((logistic(0.25_f32) - 0.562_176_5).abs() < 1e-6);
    }

    #[test]
    fn floor_count_snaps_decimal_error() {
        assert_eq!(floor_count(100, 0.29), 29);
        assert_eq!(floor_count(3, 2.0 / 3.0), 2);
        assert_eq!(floor_count(10, 0.0001), 0);
        assert_eq!(floor_count(7, 0.5), 3);
        assert_eq!(floor_count(1, 1.0), 1);
    }
}

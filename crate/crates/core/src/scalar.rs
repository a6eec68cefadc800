//! Scalar abstraction shared by the simulation and analysis code.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the model can be instantiated over.
///
/// Implemented for `f32` and `f64`. Random draws are always made in `f64`
/// and then converted, so a given seed produces the same configuration (up
/// to rounding) for either precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let tau = T::TAU();
    let r = a % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // r + tau can round up to exactly tau for tiny negative r
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

/// Signed difference `a - b` reduced to `(-π, π]`.
#[inline]
pub fn angle_diff<T: Scalar>(a: T, b: T) -> T {
    let d = wrap_angle(a - b);
    if d > T::PI() {
        d - T::TAU()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn wrap_stays_in_range() {
        for &a in &[0.0, TAU, -TAU, 3.0 * TAU + 0.5, -1e-20, -0.5, 7.0] {
            let w = wrap_angle(a);
            assert!((0.0..TAU).contains(&w), "{a} -> {w}");
        }
        assert_eq!(wrap_angle(-1e-20_f64), 0.0);
        assert!((wrap_angle(-0.5_f64) - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn diff_takes_minimal_branch() {
        assert!((angle_diff(0.1, 6.2) - (0.1 + TAU - 6.2)).abs() < 1e-12);
        assert!((angle_diff(6.2, 0.1) + (0.1 + TAU - 6.2)).abs() < 1e-12);
        assert!((angle_diff(PI, 0.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn f32_wrap() {
        let w = wrap_angle(-0.25_f32);
        assert!((w - (std::f32::consts::TAU - 0.25)).abs() < 1e-6);
    }
}

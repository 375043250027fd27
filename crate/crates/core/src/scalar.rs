//! Numeric abstraction shared by every report that carries a ratio or percent.
//!
//! Counting is always exact (`u64`). Fractions, ratios and percentages are
//! produced through [`Scalar`], so callers pick the representation: `f64` for
//! everyday use, `f32` when memory matters, or [`Rational`](crate::Rational)
//! when an identity such as "retained fraction is exactly 1/10" has to hold
//! without rounding.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A number type that can hold the result of dividing two counts.
pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive {
    /// Lifts an exact count into the scalar type.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// `num / den`, or zero when `den` is zero.
    fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            Self::zero()
        } else {
            Self::from_count(num) / Self::from_count(den)
        }
    }

    /// `100 * num / den`, or zero when `den` is zero.
    fn percent(num: u64, den: u64) -> Self {
        Self::ratio(num, den) * Self::from_count(100)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive {}

/// Renders a scalar with a fixed number of decimals. Used by every export so
/// that rounding happens only at the output boundary.
pub fn render_fixed<S: Scalar>(value: &S, decimals: usize) -> String {
    format!("{:.*}", decimals, value.to_f64_lossy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn ratio_exact_for_rationals() {
        let r: Rational = Scalar::ratio(75, 750);
        assert_eq!(r, Rational::new(1, 10));
        let p: Rational = Scalar::percent(1, 4);
        assert_eq!(p, Rational::from_integer(25));
    }

    #[test]
    fn zero_denominator_is_zero() {
        assert_eq!(<f64 as Scalar>::ratio(3, 0), 0.0);
        assert_eq!(<Rational as Scalar>::ratio(3, 0), Rational::from_integer(0));
    }

    #[test]
    fn f32_and_f64_agree_on_simple_ratios() {
        let a: f32 = Scalar::ratio(302, 41);
        let b: f64 = Scalar::ratio(302, 41);
        assert!((a as f64 - b).abs() < 1e-5);
    }

    #[test]
    fn render_rounds_at_boundary() {
        assert_eq!(render_fixed(&(353.0f64 / 856.0 * 100.0), 2), "41.24");
        assert_eq!(render_fixed(&Rational::new(1, 3), 3), "0.333");
    }
}

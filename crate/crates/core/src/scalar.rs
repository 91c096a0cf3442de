//! Numeric traits the algorithms are generic over.
//!
//! [`Scalar`] is the minimal ordered field: enough for pooling ratios,
//! facility-location objectives, max-flow capacities and graph-cut energies.
//! It is implemented by `f32`, `f64` and exact rationals such as
//! [`Ratio<i64>`](num_rational::Ratio), which the test-suite uses for exact
//! oracle comparisons. [`Real`] adds transcendental functions (log/exp) and is
//! needed wherever a likelihood or a Gaussian density appears.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Ordered numeric type supporting exact or floating arithmetic.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only for values the type cannot
    /// represent at all (NaN into a rational).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("value not representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + NumAssign + Display + Default {}

impl<T> Real for T where T: Scalar + Float + FloatConst + NumAssign + Display + Default {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn halve<T: Scalar>(x: T) -> T {
        x / T::of_usize(2)
    }

    #[test]
    fn rationals_are_scalars() {
        let r = halve(Ratio::new(1i64, 3));
        assert_eq!(r, Ratio::new(1, 6));
        assert_eq!(halve(3.0f32), 1.5);
        assert_eq!(Ratio::<i64>::of(0.5), Ratio::new(1, 2));
    }

    #[test]
    fn max_min_helpers() {
        assert_eq!(2.0f64.max_of(3.0), 3.0);
        assert_eq!(2.0f64.min_of(3.0), 2.0);
    }
}

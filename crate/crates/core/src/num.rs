//! Scalar abstractions shared by the metric, statistics and fitting code.
//!
//! Counting metrics are exact integer ratios and can be materialised in any
//! [`Scalar`], including [`num_rational::Ratio`]. Everything that needs
//! transcendental functions (p-values, confidence intervals, power-law fits)
//! is written against [`Real`], implemented for `f32` and `f64`.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// A number type that can hold a ratio of two counts.
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    /// `num / den` in this scalar type.
    fn ratio(num: u64, den: u64) -> Self {
        let n = Self::from_u64(num).expect("count representable in scalar");
        let d = Self::from_u64(den).expect("count representable in scalar");
        n / d
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + FromPrimitive + Debug {}

/// Floating-point scalar used by the statistical routines.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    /// Relative precision used as a convergence target in iterative routines.
    fn tolerance() -> Self;
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-14
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn ratio_in_each_scalar() {
        assert_eq!(<f64 as Scalar>::ratio(3, 50), 0.06);
        assert_eq!(<f32 as Scalar>::ratio(1, 4), 0.25f32);
        assert_eq!(<Ratio<i64> as Scalar>::ratio(6, 100), Ratio::new(3, 50));
    }
}

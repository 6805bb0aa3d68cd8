//! Scalar abstraction for the analytic formulas.
//!
//! The design equations only need field arithmetic, so they are written
//! against [`Scalar`] and run unchanged on `f32`, `f64` and the exact
//! [`Exact`] rational type. Anything involving `exp`/`cos` needs [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Arbitrary precision rational scalar.
pub type Exact = BigRational;

pub trait Scalar:
    Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Conversion from an `f64` literal (exact for rationals, rounded for `f32`).
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    /// Speed of light in vacuum, m/s.
    fn speed_of_light() -> Self {
        Self::from_u64(299_792_458).expect("integer literal")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + Copy + Default {}

impl Real for f32 {}
impl Real for f64 {}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> Exact {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

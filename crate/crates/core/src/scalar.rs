//! Numeric abstraction for fitness values and behavior dimensions.
//!
//! Every score in the engine is a ratio in `[0, 1]` built from small counts,
//! so the evaluation code is written once against [`Scalar`] and can run on
//! `f32`, `f64`, or exact rationals.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Num
    + Copy
    + PartialOrd
    + Debug
    + FromPrimitive
    + ToPrimitive
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// `num / den` as a scalar. `den` must be non-zero.
    fn ratio(num: usize, den: usize) -> Self {
        debug_assert!(den > 0);
        Self::from_usize(num).expect("count fits scalar") / Self::from_usize(den).expect("count fits scalar")
    }

    fn from_f64_lossy(x: f64) -> Self;

    /// Largest integer not above `self`; `self` must be non-negative.
    fn floor_index(self) -> usize;

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn floor_index(self) -> usize {
        self.max(0.0).floor() as usize
    }
}

impl Scalar for f32 {
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }

    fn floor_index(self) -> usize {
        self.max(0.0).floor() as usize
    }
}

impl Scalar for Ratio<i64> {
    fn from_f64_lossy(x: f64) -> Self {
        Ratio::approximate_float(x).unwrap_or_else(|| Ratio::from_integer(0))
    }

    fn floor_index(self) -> usize {
        let floor = self.floor().to_integer();
        usize::try_from(floor).unwrap_or(0)
    }
}

//! Scalar abstraction for the numeric pipeline.
//!
//! All core math (regression fits, goodness-of-fit, segmentation arithmetic,
//! degradation operators, tree training) is written against [`Real`] so the
//! same code runs on `f32` and `f64`. The crate root exports `f64` aliases,
//! which is what the CLI and file formats use.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the pipeline.
pub trait Real:
    Float + FromPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` parameters (configs are `f64`).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }

    /// Conversion from sample counts and indices.
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize conversion")
    }

    /// Widening conversion used where statistics are reported as `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint<T: Real>(a: T, b: T) -> T {
        (a + b) / T::from_f64_lossy(2.0)
    }

    #[test]
    fn works_for_both_widths() {
        assert_eq!(midpoint(1.0f64, 2.0f64), 1.5);
        assert_eq!(midpoint(1.0f32, 2.0f32), 1.5);
    }
}

//! Scalar abstraction for the numeric core.
//!
//! The recurrent cells, optimizer, and loss are written against this trait
//! so the same code runs in f32 or f64. The pipeline itself uses the f64
//! aliases exported from the crate root.

use std::fmt::Debug;

/// Floating point scalar: f32 or f64.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + Debug + Default + 'static
{
    /// Lossy conversion from f64, for constants and RNG output.
    fn from_f64(value: f64) -> Self {
        num_traits::FromPrimitive::from_f64(value).expect("f64 conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("f64 conversion")
    }

    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }

    fn half() -> Self {
        Self::from_f64(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

//! Scalar abstraction for the numeric core.

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the numeric core is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssign
    + std::iter::Sum<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for constants and RNG output.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

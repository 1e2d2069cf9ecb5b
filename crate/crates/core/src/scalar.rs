use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point type the model is evaluated in: f32 or f64.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an f64 literal. Never fails for finite inputs on f32/f64.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Lossy view used in error messages and formatting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

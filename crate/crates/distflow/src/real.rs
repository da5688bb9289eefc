//! Scalar abstraction for the closed-form lemma layer.
//!
//! The scalar optimization formulas are plain arithmetic over an ordered
//! field, so they are written against a small trait and instantiated at f32
//! or f64. Everything geometric (meshes, trees, flows) is pinned to f64,
//! where the verification tolerances actually live.

use std::fmt::{Debug, Display};

/// Floating point scalar usable in the closed-form lemma layer.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from f64 for literal constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

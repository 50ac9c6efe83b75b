use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar usable by the complex linear algebra: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon scaled for loose comparisons inside factorizations.
    fn tiny() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the scalar type")
    }
}

impl Real for f32 {
    fn tiny() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn tiny() -> Self {
        1e-13
    }
}

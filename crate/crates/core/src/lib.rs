// comparisons like `!(x > 0.0)` deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circularity;
pub mod cli;
pub mod convexbox;
pub mod domains;
pub mod domination;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod scaling;

pub use error::{Error, Result};
pub use num_complex::Complex;

/// Vector in `C^n` with `f64` entries.
pub type CVector = numeric::CVec<f64>;
/// Square complex matrix with `f64` entries.
pub type CLinearMap = numeric::CMat<f64>;
/// Complex affine map with `f64` entries.
pub type AffineMap = numeric::CAffine<f64>;
/// Certified `f64` bracket.
pub type Interval = numeric::RealInterval<f64>;
/// `f64` complex scalar.
pub type C64 = Complex<f64>;

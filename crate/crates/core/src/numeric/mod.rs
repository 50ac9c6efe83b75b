//! Shared numerics: complex linear algebra, interval brackets, seeded
//! sampling and direction-sphere optimization.

pub mod interval;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod sphere;

pub use interval::RealInterval;
pub use linalg::{orthonormal_complement_basis, CAffine, CMat, CVec};
pub use sampling::Sampler;
pub use scalar::Real;
pub use sphere::{maximize_on_unit_sphere, SphereMax, SphereSearch};

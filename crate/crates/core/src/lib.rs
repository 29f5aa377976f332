#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Numerical laboratory for asymptotic velocities, asymptotically Euclidean
//! transformations and the asymptotic quantum measure.
//!
//! Core types are generic over the scalar (`f32`/`f64` through [`Real`]); the
//! aliases below fix `f64`, which is what the experiments and the CLI use.

pub mod classical;
pub mod extrapolate;
pub mod geometry;
pub mod io;
pub mod measures;
pub mod probability;
pub mod quantum;
pub mod scalar;
pub mod suite;

pub use scalar::Real;

pub type Vec3d = geometry::Vec3<f64>;
pub type Trajectory = geometry::SampledTrajectory<f64>;
pub type BigBang = geometry::NBigBang<f64>;
pub type Transform = geometry::CausalTransform<f64>;
pub type VelocityBox = geometry::IntervalBox<f64>;

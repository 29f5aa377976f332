//! Space-time points, sampled semitrajectories, causal transformations and
//! their asymptotic behaviour.

mod asymptotic;
mod interval;
mod trajectory;
mod transform;
mod vector;
mod velocity;

pub use asymptotic::{
    classify_transform, compactified_transform, compactify, cone_sandwich_check, decompactify, default_probes,
    estimate_asymptotic_transform, fit_affine, Classification, PlusSource, RayConfig, SandwichReport, TransformClass,
};
pub use interval::IntervalBox;
pub use trajectory::{geometric_times, NBigBang, SampledTrajectory, SpaceTimePoint, DEFAULT_MIN_SEPARATION};
pub use transform::{apply_transform, CausalTransform, TransformSpec};
pub use vector::{Mat3, Vec3};
pub use velocity::{
    decade_estimates, estimate_asymptotic_velocity, AsymptoticVelocityEstimate, DecadeRow, WindowEstimate,
    FIT_ACCEPT, MIN_DECAY_EXPONENT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("too few samples for asymptotic analysis ({0})")]
    TooFewSamples(usize),
    #[error("not asymptotically regular: {0}")]
    NotConverged(String),
    #[error("transform not asymptotically regular: {0}")]
    NotRegular(String),
    #[error("estimated asymptotic transform disagrees with analytic map: {0}")]
    AnalyticMismatch(String),
    #[error("non-causal transform: {0}")]
    NonCausal(String),
    #[error("compactification needs t > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("sample times not strictly increasing: {0}")]
    NotIncreasing(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid interval box: {0}")]
    InvalidBox(String),
    #[error("invalid probe set: {0}")]
    InvalidProbes(String),
    #[error("invalid transform parameters: {0}")]
    InvalidTransform(String),
    #[error("not an N-bigbang: {0}")]
    NotBigBang(String),
}

//! The doubling-map toy universe, sequences of equivalent events and the
//! measurement probability ratio.

mod bernoulli;
mod lln;
mod measurement;

pub use bernoulli::{
    orbit, relative_frequency, sample_frequencies, BernoulliUniverse, DoublingState, DyadicBits, DyadicState, EventSpec,
    Frequency, FrequencySample, InitialCondition, OrbitPoint, TickPredicate,
};
pub use lln::{digit_pair_chi_square, lln_deviation_measure, DigitPairTest, LlnEstimate};
pub use measurement::{measurement_probability, MeasurementQuery};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbabilityError {
    #[error("experiment mass {0} is not positive")]
    ZeroExperimentMass(f64),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("parse error: {0}")]
    Parse(String),
}

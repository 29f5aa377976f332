//! Box-discretised measures: transfer along maps, the corrected transfer through the
//! flow, quotients by translations and the initial-condition measure tables.

mod discrete;
mod map;
mod ncdic;
mod quotient;
mod transfer;

pub use discrete::{build_pi_c, pi_c_density, BoxMeasure, DensityMeasure, DiscreteMeasure, UniformMeasure};
pub use map::{pullback, pushforward, MeasurableMap, Pullback, PullbackOptions, Pushforward, PushforwardOptions};
pub use ncdic::{ncdic_report, NcdicConfig, NcdicReport, NcdicRow};
pub use quotient::{quotient_measure, GroupActionSpec, QuotientOptions, QuotientResult};
pub use transfer::{
    corrected_transfer, flow_image, ConeMeasure, FnTimeMeasure, QuantumEta, TimeIndexedMeasure, TransferReport,
};

use thiserror::Error;

use crate::classical::ClassicalError;
use crate::geometry::GeometryError;
use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unresolved boundary: mass {mass:.3e} still straddles target boxes at depth {depth}")]
    UnresolvedBoundary { mass: f64, depth: usize },
    #[error("discontinuity detected in ({lo:?}, {hi:?}]: image diameter stalled for {levels} levels")]
    DiscontinuityDetected { lo: Vec<f64>, hi: Vec<f64>, levels: usize },
    #[error("measure is not invariant under the action: {0}")]
    NotInvariant(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("flow map not monotone: {0}")]
    NonMonotoneFlow(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

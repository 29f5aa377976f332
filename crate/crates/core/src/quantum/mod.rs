//! Grid Schrödinger evolution, the asymptotic quantum measure of cone regions and
//! related checks.

mod aet;
mod grid;
mod measure;
mod semiclassical;

pub use aet::{aet_invariance_check, AetOptions, AetReport, SandwichRow};
pub use grid::{
    evolve, Coupling, GridScalar, GridSpec, GridState, Propagator, QuantumPotential, EDGE_CELLS, EDGE_TOLERANCE,
};
pub use measure::{
    asymptotic_quantum_measure, box_mass, cone_section, quantum_asymptotic_velocity_check, sigma_ladder, GridMeasure,
    PointSourceSpec, QuantumMeasureRun, SigmaLadder, VelocityCheckReport, VelocityCheckRow,
};
pub use semiclassical::{
    free_action, free_propagator, mixed_action_derivative, semiclassical_density_compare, two_source_toy,
    SemiclassicalComparison, TwoSourceToy,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("grid too small: {edge_fraction:.3e} of the norm reached the boundary at t = {t}")]
    GridTooSmall { t: f64, edge_fraction: f64 },
    #[error("box unresolvable: {0}")]
    BoxUnresolvable(String),
    #[error("transform is not asymptotically identical: {0}")]
    NotAsymptoticallyIdentical(String),
    #[error("region mapping failed: {0}")]
    RegionMapping(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

//! Classical N-body dynamics from a common origin, the square-barrier example and
//! classical scattering.

mod barrier;
mod dynamics;
mod potential;
mod scattering;

pub use barrier::{
    barrier_trajectory_oracle, delta_c_barrier, gap_speed, omega_v_barrier, omega_v_from_trajectory,
    solve_asymptotic_boundary_condition, BoundaryConditionSolve, DeltaC,
};
pub use dynamics::{integrate_nbigbang, ClassicalRun, IntegrationOptions, PairSpec, SystemSpec};
pub use potential::{PotentialSpec, Radial};
pub use scattering::{
    classical_cross_section, cross_section_from_table, deflection_function, reverse_emission_density,
    CrossSectionResult, DeflectionTable, EmissionDensity, ScatteringOptions,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("integration unstable at t = {t}: relative energy drift {drift:.3e}")]
    StepUnstable { t: f64, drift: f64 },
    #[error("particles {i} and {j} overlap at t = {t} under a singular potential")]
    ParticleOverlap { t: f64, i: usize, j: usize },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("deflection function not monotone near s = {s} (rainbow angle)")]
    NonMonotoneDeflection { s: f64 },
    #[error("trajectory at impact parameter {s} does not escape (orbiting)")]
    Orbiting { s: f64 },
    #[error("potential produces no scattering")]
    NoScattering,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Flow map `X_t(v_I)` of a particle released from the barrier centre (1D).
pub fn barrier_flow(m: f64, v0: f64, a: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Clone {
    move |t, v_i| barrier_trajectory_oracle(m, v0, a, v_i, t)
}

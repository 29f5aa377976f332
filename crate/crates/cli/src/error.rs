use aml_core::classical::ClassicalError;
use aml_core::geometry::GeometryError;
use aml_core::io::IoError;
use aml_core::measures::MeasureError;
use aml_core::probability::ProbabilityError;
use aml_core::quantum::QuantumError;
use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Resource(String),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }

    /// Input files that cannot be read or parsed are configuration errors.
    pub fn input(e: IoError) -> Self {
        CliError::Config(format!("input: {e}"))
    }

    /// Outputs that cannot be written are resource errors.
    pub fn output(e: IoError) -> Self {
        CliError::Resource(format!("output: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NotConverged(_) | GeometryError::NotRegular(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ClassicalError> for CliError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::Geometry(g) => g.into(),
            ClassicalError::InvalidSystem(_) | ClassicalError::NoScattering => CliError::Config(e.to_string()),
            _ => CliError::NonConvergence(e.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Geometry(g) => g.into(),
            QuantumError::GridTooSmall { .. } => CliError::Resource(e.to_string()),
            QuantumError::RegionMapping(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Quantum(q) => q.into(),
            MeasureError::Classical(c) => c.into(),
            MeasureError::Geometry(g) => g.into(),
            MeasureError::InvalidMeasure(_) | MeasureError::Unsupported(_) => CliError::Config(e.to_string()),
            _ => CliError::NonConvergence(e.to_string()),
        }
    }
}

impl From<ProbabilityError> for CliError {
    fn from(e: ProbabilityError) -> Self {
        CliError::Config(e.to_string())
    }
}

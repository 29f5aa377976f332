use serde::{Deserialize, Serialize};

use super::ProbabilityError;

/// Masses of an experiment event `E` and a result `R ⊆ E`, on any common scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementQuery {
    pub experiment_mass: f64,
    pub result_mass: f64,
}

/// Relative slack allowed when a result mass computed separately exceeds the experiment mass.
const CONTAINMENT_SLACK: f64 = 1e-12;

/// `P(R|E) = ν(R) / ν(E)`.
pub fn measurement_probability(q: &MeasurementQuery) -> Result<f64, ProbabilityError> {
    if !q.experiment_mass.is_finite() || q.experiment_mass <= 0.0 {
        return Err(ProbabilityError::ZeroExperimentMass(q.experiment_mass));
    }
    if !(q.result_mass >= 0.0) || q.result_mass > q.experiment_mass * (1.0 + CONTAINMENT_SLACK) {
        return Err(ProbabilityError::InvalidQuery(format!(
            "result mass {} is not within [0, {}]",
            q.result_mass, q.experiment_mass
        )));
    }
    Ok((q.result_mass / q.experiment_mass).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_rules() {
        let q = MeasurementQuery { experiment_mass: 0.3, result_mass: 0.3 };
        assert_eq!(measurement_probability(&q).unwrap(), 1.0);
        assert!(matches!(
            measurement_probability(&MeasurementQuery { experiment_mass: 0.0, result_mass: 0.0 }),
            Err(ProbabilityError::ZeroExperimentMass(_))
        ));
        assert!(measurement_probability(&MeasurementQuery { experiment_mass: 1.0, result_mass: 1.5 }).is_err());
    }
}

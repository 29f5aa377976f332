use serde::{Deserialize, Serialize};

use super::discrete::BoxMeasure;
use super::MeasureError;
use crate::geometry::IntervalBox;
use crate::quantum::{box_mass, cone_section, GridSpec, GridState, PointSourceSpec, Propagator, QuantumPotential};

/// A family of position-space measures `η_t` evaluated at increasing times.
pub trait TimeIndexedMeasure {
    fn dim(&self) -> usize;
    fn mass_at(&mut self, t: f64, region: &IntervalBox<f64>) -> Result<f64, MeasureError>;
}

/// `η_t(Δ) = ∫_Δ |ψ_t|²` for the regularised point source, propagated on demand.
/// Times must not decrease between calls.
pub struct QuantumEta {
    state: GridState<f64>,
    prop: Propagator<f64>,
    x0: Vec<f64>,
}

impl QuantumEta {
    pub fn new(spec: &GridSpec, source: &PointSourceSpec, potential: &QuantumPotential, dt: f64) -> Result<Self, MeasureError> {
        Ok(Self { state: source.state(spec)?, prop: Propagator::new(spec, potential, dt)?, x0: source.x0.clone() })
    }

    pub fn advance(&mut self, t: f64) -> Result<(), MeasureError> {
        if t < self.state.t() {
            return Err(MeasureError::InvalidMeasure(format!("time {t} precedes the current time {}", self.state.t())));
        }
        Ok(self.prop.advance(&mut self.state, t)?)
    }

    pub fn state(&self) -> &GridState<f64> {
        &self.state
    }

    pub fn source_point(&self) -> &[f64] {
        &self.x0
    }

    /// The cone measure `Δ ↦ η_t(x0 + Δt)` on velocities at the current time.
    pub fn cone_measure(&self) -> ConeMeasure<'_> {
        ConeMeasure { state: &self.state, x0: &self.x0 }
    }
}

impl TimeIndexedMeasure for QuantumEta {
    fn dim(&self) -> usize {
        self.state.dim()
    }

    fn mass_at(&mut self, t: f64, region: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        self.advance(t)?;
        if region.is_degenerate() {
            return Ok(0.0);
        }
        Ok(box_mass(&self.state, region)?)
    }
}

/// Velocity-space measure `Δ ↦ ∫_{x0+Δt} |ψ_t|²` for a fixed evolved state.
pub struct ConeMeasure<'a> {
    state: &'a GridState<f64>,
    x0: &'a [f64],
}

impl BoxMeasure for ConeMeasure<'_> {
    fn dim(&self) -> usize {
        self.state.dim()
    }

    fn mass(&self, b: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        if b.is_degenerate() {
            return Ok(0.0);
        }
        Ok(box_mass(self.state, &cone_section(b, self.x0, self.state.t()))?)
    }
}

/// Closure-backed [`TimeIndexedMeasure`].
pub struct FnTimeMeasure<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: FnMut(f64, &IntervalBox<f64>) -> Result<f64, MeasureError>> TimeIndexedMeasure for FnTimeMeasure<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mass_at(&mut self, t: f64, region: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        (self.f)(t, region)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub t: Vec<f64>,
    /// `X_t(Δ_I)` per time.
    pub region: Vec<(f64, f64)>,
    pub mass: Vec<f64>,
    /// Mass at the largest time.
    pub limit: f64,
    /// Change between the last two times.
    pub limit_error: f64,
}

/// Samples per box used to confirm that `X_t` is monotone on it.
const FLOW_SAMPLES: usize = 33;

/// Image `X_t(Δ)` of a one-dimensional velocity box under a monotone flow map.
pub fn flow_image(x_t: &dyn Fn(f64, f64) -> f64, t: f64, b: &IntervalBox<f64>) -> Result<(f64, f64), MeasureError> {
    let (lo, hi) = (b.lo()[0], b.hi()[0]);
    if lo == hi {
        let x = x_t(t, lo);
        return Ok((x, x));
    }
    let xs: Vec<f64> = (0..FLOW_SAMPLES).map(|i| x_t(t, lo + (hi - lo) * i as f64 / (FLOW_SAMPLES - 1) as f64)).collect();
    let up = xs.windows(2).all(|w| w[1] >= w[0]);
    let down = xs.windows(2).all(|w| w[1] <= w[0]);
    if !(up || down) || xs.iter().any(|x| !x.is_finite()) {
        return Err(MeasureError::NonMonotoneFlow(format!("X_{t} is not monotone on ({lo}, {hi}]")));
    }
    let (a, z) = (xs[0], xs[FLOW_SAMPLES - 1]);
    Ok((a.min(z), a.max(z)))
}

/// `π(Δ_I) = lim_t η_t[X_t(Δ_I)]`, evaluated along `t_list` (strictly increasing)
/// for a one-dimensional velocity box.
pub fn corrected_transfer(
    eta: &mut dyn TimeIndexedMeasure,
    x_t: &dyn Fn(f64, f64) -> f64,
    box_i: &IntervalBox<f64>,
    t_list: &[f64],
) -> Result<TransferReport, MeasureError> {
    if eta.dim() != 1 || box_i.dim() != 1 {
        return Err(MeasureError::Unsupported("corrected transfer is implemented for one-dimensional motion".into()));
    }
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::InvalidMeasure("t_list must be positive and strictly increasing".into()));
    }
    let mut region = Vec::with_capacity(t_list.len());
    let mut mass = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let (a, b) = flow_image(x_t, t, box_i)?;
        region.push((a, b));
        mass.push(eta.mass_at(t, &IntervalBox::interval(a, b)?)?);
    }
    let k = mass.len();
    let limit = mass[k - 1];
    let limit_error = if k > 1 { (mass[k - 1] - mass[k - 2]).abs() } else { 0.0 };
    Ok(TransferReport { t: t_list.to_vec(), region, mass, limit, limit_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_flow_reproduces_the_cone() {
        // η_t uniform with density 1/t: every cone has mass |Δ|.
        let mut eta = FnTimeMeasure { dim: 1, f: |t: f64, r: &IntervalBox<f64>| Ok(r.volume() / t) };
        let b = IntervalBox::interval(-0.5, 1.0).unwrap();
        let rep = corrected_transfer(&mut eta, &|t, v| v * t, &b, &[1.0, 10.0, 100.0]).unwrap();
        assert!(rep.mass.iter().all(|m| (m - 1.5).abs() < 1e-12));
        assert_eq!(rep.limit_error, 0.0);
    }

    #[test]
    fn folding_flows_are_rejected() {
        let mut eta = FnTimeMeasure { dim: 1, f: |_: f64, r: &IntervalBox<f64>| Ok(r.volume()) };
        let b = IntervalBox::interval(-1.0, 1.0).unwrap();
        let err = corrected_transfer(&mut eta, &|t, v| v * v * t, &b, &[1.0]).unwrap_err();
        assert!(matches!(err, MeasureError::NonMonotoneFlow(_)));
    }
}

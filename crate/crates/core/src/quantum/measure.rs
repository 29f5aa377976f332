use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridScalar, GridSpec, GridState, Propagator, QuantumPotential};
use super::QuantumError;
use crate::geometry::IntervalBox;

/// Gaussian stand-in for a position eigenvector at `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSourceSpec {
    pub x0: Vec<f64>,
    pub sigma: f64,
}

impl PointSourceSpec {
    pub fn at_origin(dim: usize, sigma: f64) -> Self {
        Self { x0: vec![0.0; dim], sigma }
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<(), QuantumError> {
        if self.x0.len() != spec.dim {
            return Err(QuantumError::InvalidSource(format!("source has {} coordinates for d = {}", self.x0.len(), spec.dim)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(QuantumError::InvalidSource(format!("σ = {} must be positive", self.sigma)));
        }
        if self.sigma < 4.0 * spec.dx() * (1.0 - 1e-12) {
            return Err(QuantumError::InvalidSource(format!("σ = {} is below 4Δx = {}", self.sigma, 4.0 * spec.dx())));
        }
        Ok(())
    }

    /// `∏ exp(−(x−x0)²/(4σ²)) / (2σ√π)`: its transform has `|ψ̃(p)|² = e^{−2σ²p²}/(2π)^d`,
    /// which tends to the delta-normalised `1/(2π)^d` as `σ → 0`.
    pub fn state<T: GridScalar>(&self, spec: &GridSpec) -> Result<GridState<T>, QuantumError> {
        spec.validate()?;
        self.validate(spec)?;
        let s = self.sigma;
        let amp = 1.0 / (2.0 * s * PI.sqrt());
        let state = GridState::from_fn(spec.clone(), |x| {
            let e: f64 = x.iter().zip(&self.x0).map(|(x, c)| (x - c).powi(2)).sum();
            num_complex::Complex::new(amp.powi(spec.dim as i32) * (-e / (4.0 * s * s)).exp(), 0.0)
        })?;
        state.check_edges(state.norm())?;
        Ok(state)
    }
}

/// Box masses at one evolution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    pub boxes: Vec<IntervalBox<f64>>,
    pub mass: Vec<f64>,
    pub t_used: f64,
    pub sigma_used: f64,
}

/// Per-time box masses together with the reported `t → ∞` value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumMeasureRun {
    pub per_t: Vec<GridMeasure>,
    /// Mass at the largest time.
    pub limit: Vec<f64>,
    /// `|mass(t_last) − mass(t_prev)|`, zero when only one time was evaluated.
    pub limit_error: Vec<f64>,
    pub norm: f64,
}

/// `∫_a^b φ_k` for the hat functions `φ_k` of a uniform axis, as `(k, weight)`.
pub(crate) fn hat_weights(a: f64, b: f64, origin: f64, h: f64, n: usize) -> Vec<(usize, f64)> {
    // Antiderivative of the unit hat centred at 0.
    let cum = |u: f64| {
        if u <= -1.0 {
            0.0
        } else if u <= 0.0 {
            0.5 * (1.0 + u).powi(2)
        } else if u <= 1.0 {
            1.0 - 0.5 * (1.0 - u).powi(2)
        } else {
            1.0
        }
    };
    let k_lo = (((a - origin) / h).floor() - 1.0).max(0.0) as usize;
    let k_hi = ((((b - origin) / h).ceil() + 1.0).max(0.0) as usize).min(n.saturating_sub(1));
    (k_lo..=k_hi)
        .filter_map(|k| {
            let xk = origin + k as f64 * h;
            let w = h * (cum((b - xk) / h) - cum((a - xk) / h));
            (w > 0.0).then_some((k, w))
        })
        .collect()
}

/// Integral over `region` of the piecewise-(bi)linear interpolant of `values`
/// sampled on `spec`'s grid (or on its momentum grid when `momentum`).
fn box_integral(spec: &GridSpec, values: &[f64], region: &IntervalBox<f64>, momentum: bool) -> Result<f64, QuantumError> {
    let d = spec.dim;
    if region.dim() != d {
        return Err(QuantumError::BoxUnresolvable(format!("{}-dimensional box on a {d}-dimensional grid", region.dim())));
    }
    let n = spec.n;
    let mut weights = Vec::with_capacity(d);
    for axis in 0..d {
        let (origin, h) = if momentum {
            (-(n as f64 / 2.0) * spec.dp(), spec.dp())
        } else {
            (spec.coord(axis, 0), spec.dx())
        };
        let top = origin + (n - 1) as f64 * h;
        let (a, b) = (region.lo()[axis], region.hi()[axis]);
        if a < origin - 1e-12 * h || b > top + 1e-12 * h {
            return Err(QuantumError::BoxUnresolvable(format!(
                "({a}, {b}] leaves the {} window [{origin}, {top}]",
                if momentum { "momentum" } else { "position" }
            )));
        }
        weights.push(hat_weights(a, b, origin, h, n));
    }
    Ok(if d == 1 {
        weights[0].iter().map(|&(k, w)| w * values[k]).sum()
    } else {
        weights[0]
            .iter()
            .map(|&(i, wi)| wi * weights[1].iter().map(|&(j, wj)| wj * values[i * n + j]).sum::<f64>())
            .sum()
    })
}

/// Probability in the spatial box `region` (exact for the linear interpolant of `|ψ|²`).
pub fn box_mass<T: GridScalar>(state: &GridState<T>, region: &IntervalBox<f64>) -> Result<f64, QuantumError> {
    box_integral(state.spec(), &state.density(), region, false)
}

/// Cone section `x0 + Δ·t`.
pub fn cone_section(delta: &IntervalBox<f64>, x0: &[f64], t: f64) -> IntervalBox<f64> {
    delta.scaled(t).translated(x0)
}

fn check_boxes(spec: &GridSpec, boxes: &[IntervalBox<f64>], t_list: &[f64]) -> Result<f64, QuantumError> {
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QuantumError::InvalidGrid("t_list must be positive and strictly increasing".into()));
    }
    let t_max = *t_list.last().unwrap();
    for b in boxes {
        if b.dim() != spec.dim {
            return Err(QuantumError::BoxUnresolvable(format!("{}-dimensional box on a {}-dimensional grid", b.dim(), spec.dim)));
        }
        if b.min_side() * t_max < 4.0 * spec.dx() {
            return Err(QuantumError::BoxUnresolvable(format!(
                "box side {} spans less than 4Δx at t = {t_max}",
                b.min_side()
            )));
        }
    }
    Ok(t_max)
}

/// Evolves the regularised point source and records `∫_{x0+Δt}|ψ|²` for every box at
/// every `t` in `t_list` (strictly increasing).
pub fn asymptotic_quantum_measure<T: GridScalar>(
    spec: &GridSpec,
    source: &PointSourceSpec,
    potential: &QuantumPotential,
    boxes: &[IntervalBox<f64>],
    t_list: &[f64],
    dt: f64,
) -> Result<QuantumMeasureRun, QuantumError> {
    check_boxes(spec, boxes, t_list)?;
    let mut state = source.state::<T>(spec)?;
    let norm = state.norm();
    let mut prop = Propagator::new(spec, potential, dt)?;
    let mut per_t = Vec::with_capacity(t_list.len());
    for &t in t_list {
        prop.advance(&mut state, t)?;
        let density = state.density();
        let mass = boxes
            .iter()
            .map(|b| box_integral(spec, &density, &cone_section(b, &source.x0, t), false))
            .collect::<Result<Vec<_>, _>>()?;
        per_t.push(GridMeasure { boxes: boxes.to_vec(), mass, t_used: t, sigma_used: source.sigma });
    }
    let last = &per_t[per_t.len() - 1].mass;
    let limit_error = match per_t.len() {
        1 => vec![0.0; last.len()],
        k => last.iter().zip(&per_t[k - 2].mass).map(|(a, b)| (a - b).abs()).collect(),
    };
    Ok(QuantumMeasureRun { limit: last.clone(), limit_error, per_t, norm })
}

/// Runs over a ladder of source widths and extrapolates each box mass to `σ → 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaLadder {
    pub sigmas: Vec<f64>,
    pub runs: Vec<QuantumMeasureRun>,
    /// Linear extrapolation in `σ²` through the two smallest widths.
    pub extrapolated: Vec<f64>,
}

pub fn sigma_ladder<T: GridScalar>(
    spec: &GridSpec,
    x0: &[f64],
    sigmas: &[f64],
    potential: &QuantumPotential,
    boxes: &[IntervalBox<f64>],
    t_list: &[f64],
    dt: f64,
) -> Result<SigmaLadder, QuantumError> {
    if sigmas.is_empty() {
        return Err(QuantumError::InvalidSource("empty σ ladder".into()));
    }
    let mut order: Vec<usize> = (0..sigmas.len()).collect();
    order.sort_by(|&a, &b| sigmas[b].total_cmp(&sigmas[a]));
    let sigmas: Vec<f64> = order.iter().map(|&i| sigmas[i]).collect();
    let runs = sigmas
        .par_iter()
        .map(|&sigma| {
            let source = PointSourceSpec { x0: x0.to_vec(), sigma };
            asymptotic_quantum_measure::<T>(spec, &source, potential, boxes, t_list, dt)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = runs.len();
    let extrapolated = if k < 2 {
        runs[0].limit.clone()
    } else {
        let (s1, s2) = (sigmas[k - 2].powi(2), sigmas[k - 1].powi(2));
        runs[k - 2]
            .limit
            .iter()
            .zip(&runs[k - 1].limit)
            .map(|(m1, m2)| (s1 * m2 - s2 * m1) / (s1 - s2))
            .collect()
    };
    Ok(SigmaLadder { sigmas, runs, extrapolated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityCheckRow {
    pub velocity_box: IntervalBox<f64>,
    /// `∫_{x0+Δt}|ψ(t)|²`.
    pub position_mass: f64,
    /// `∫_{mΔ}|ψ̃|²`.
    pub momentum_mass: f64,
}

impl VelocityCheckRow {
    pub fn relative_difference(&self) -> f64 {
        (self.position_mass - self.momentum_mass).abs() / self.momentum_mass.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityCheckReport {
    pub t: f64,
    pub norm: f64,
    pub rows: Vec<VelocityCheckRow>,
}

/// Compares the spatial cone mass after free evolution to `t` with the momentum-space
/// mass of `mΔ` computed from the same state.
pub fn quantum_asymptotic_velocity_check<T: GridScalar>(
    spec: &GridSpec,
    source: &PointSourceSpec,
    boxes: &[IntervalBox<f64>],
    t: f64,
) -> Result<VelocityCheckReport, QuantumError> {
    check_boxes(spec, boxes, &[t])?;
    let mut state = source.state::<T>(spec)?;
    let mut prop = Propagator::new(spec, &QuantumPotential::free(), t)?;
    prop.advance(&mut state, t)?;
    let density = state.density();
    let momentum = state.momentum_density();
    let m = spec.mass;
    let rows = boxes
        .iter()
        .map(|b| {
            Ok(VelocityCheckRow {
                velocity_box: b.clone(),
                position_mass: box_integral(spec, &density, &cone_section(b, &source.x0, t), false)?,
                momentum_mass: box_integral(spec, &momentum, &b.scaled(m), true)?,
            })
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    Ok(VelocityCheckReport { t, norm: state.norm(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_weights_integrate_linear_interpolant() {
        // f(x) = 2x + 1 is reproduced exactly by its linear interpolant.
        let (origin, h, n) = (-1.0, 0.1, 41);
        let w = hat_weights(-0.33, 0.57, origin, h, n);
        let got: f64 = w.iter().map(|&(k, w)| w * (2.0 * (origin + k as f64 * h) + 1.0)).sum();
        let exact = (0.57f64.powi(2) + 0.57) - (0.33f64.powi(2) - 0.33);
        assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
        let total: f64 = hat_weights(origin, origin + 40.0 * h, origin, h, n).iter().map(|p| p.1).sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn full_window_mass_equals_norm() {
        let spec = GridSpec::new(1, 1024, 30.0, 1.0);
        let source = PointSourceSpec::at_origin(1, 0.5);
        let mut state = source.state::<f64>(&spec).unwrap();
        Propagator::new(&spec, &QuantumPotential::free(), 1.0).unwrap().advance(&mut state, 3.0).unwrap();
        let window = IntervalBox::interval(spec.coord(0, 0), spec.coord(0, 1023)).unwrap();
        assert!((box_mass(&state, &window).unwrap() - state.norm()).abs() < 1e-8 * state.norm());
    }

    #[test]
    fn source_transform_is_delta_normalised() {
        let spec = GridSpec::new(1, 2048, 40.0, 1.0);
        let sigma = 0.3;
        let state = PointSourceSpec::at_origin(1, sigma).state::<f64>(&spec).unwrap();
        let mom = state.momentum_density();
        for j in [1024usize, 1030, 1100, 1200] {
            let p = (j as f64 - 1024.0) * spec.dp();
            let expect = (-2.0 * sigma * sigma * p * p).exp() / (2.0 * PI);
            assert!((mom[j] - expect).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn boxes_must_fit_and_resolve() {
        let spec = GridSpec::new(1, 256, 10.0, 1.0);
        let source = PointSourceSpec::at_origin(1, 0.5);
        let far = [IntervalBox::interval(11.0, 12.0).unwrap()];
        let res = asymptotic_quantum_measure::<f64>(&spec, &source, &QuantumPotential::free(), &far, &[1.0], 1.0);
        assert!(matches!(res, Err(QuantumError::BoxUnresolvable(_))), "{res:?}");
        let thin = [IntervalBox::interval(0.0, 0.01).unwrap()];
        let res = asymptotic_quantum_measure::<f64>(&spec, &source, &QuantumPotential::free(), &thin, &[1.0], 1.0);
        assert!(matches!(res, Err(QuantumError::BoxUnresolvable(_))));
        let narrow = PointSourceSpec::at_origin(1, 0.1);
        assert!(matches!(narrow.state::<f64>(&spec), Err(QuantumError::InvalidSource(_))));
    }
}

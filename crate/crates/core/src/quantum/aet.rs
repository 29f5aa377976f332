//! Invariance of the asymptotic quantum measure under asymptotically identical
//! transformations, checked through the ε-sandwich on cone sections.

use serde::{Deserialize, Serialize};

use super::grid::{GridScalar, GridSpec, Propagator, QuantumPotential};
use super::measure::{box_mass, cone_section, PointSourceSpec};
use super::QuantumError;
use crate::geometry::{
    classify_transform, default_probes, CausalTransform, IntervalBox, PlusSource, RayConfig, TransformClass, Vec3,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AetOptions {
    /// Refuse transforms not classified as asymptotically identical.
    pub enforce_identity: bool,
    /// Largest accepted `|μ_Qt[f(I)] − μ_Qt[I]| / μ_Qt[I]` at the final time.
    pub relative_tolerance: f64,
    pub classify_tolerance: f64,
    /// Points per side used to check that `f_X(t′, ·)` is monotone on the cone section.
    pub monotonicity_samples: usize,
}

impl Default for AetOptions {
    fn default() -> Self {
        Self { enforce_identity: true, relative_tolerance: 0.05, classify_tolerance: 1e-3, monotonicity_samples: 33 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub eps: f64,
    /// `μ_Qt(I₋ε)` per time.
    pub lower: Vec<f64>,
    /// `μ_Qt(I₊ε)` per time.
    pub upper: Vec<f64>,
    pub holds: Vec<bool>,
    /// Earliest tested time from which the sandwich holds at every later tested time.
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AetReport {
    pub class: Option<TransformClass<f64>>,
    pub t: Vec<f64>,
    /// Region `f(Iᶜ)(t)` as an interval per time.
    pub region: Vec<(f64, f64)>,
    pub mass_transformed: Vec<f64>,
    pub mass_plain: Vec<f64>,
    pub sandwich: Vec<SandwichRow>,
    /// `|μ_Qt[f(I)] − μ_Qt[I]| / μ_Qt[I]` at the largest time.
    pub final_relative_gap: f64,
    /// Some sandwich fails at the largest time or the final gap exceeds the tolerance.
    pub violation: bool,
}

/// Image of the cone section `x0 + I·t′` under `f_X(t′, ·)` along the first axis, `f_T(t′) = t`.
fn transformed_section(
    f: &CausalTransform<f64>,
    interval: &IntervalBox<f64>,
    x0: f64,
    t: f64,
    samples: usize,
) -> Result<(f64, f64), QuantumError> {
    let t_src = f.time_preimage(t, t)?;
    if !(t_src > 0.0) {
        return Err(QuantumError::RegionMapping(format!("time preimage {t_src} of t = {t} is not positive")));
    }
    let (a, b) = (interval.lo()[0], interval.hi()[0]);
    let k = samples.max(2);
    let ys: Vec<f64> = (0..k)
        .map(|i| {
            let v = a + (b - a) * i as f64 / (k - 1) as f64;
            f.space(t_src, Vec3::new(x0 + v * t_src, 0.0, 0.0)).x
        })
        .collect();
    let increasing = ys.windows(2).all(|w| w[1] > w[0]);
    let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) || ys.iter().any(|y| !y.is_finite()) {
        return Err(QuantumError::RegionMapping(format!("f_X({t_src}, ·) is not monotone on the cone section")));
    }
    Ok((ys[0].min(ys[k - 1]), ys[0].max(ys[k - 1])))
}

/// Compares `μ_Qt` on `f(Iᶜ)(t)` with `μ_Qt` on `Iᶜ(t)` and on the shrunk/grown
/// intervals `I∓ε`, for a one-dimensional grid.
#[allow(clippy::too_many_arguments)]
pub fn aet_invariance_check<T: GridScalar>(
    spec: &GridSpec,
    source: &PointSourceSpec,
    potential: &QuantumPotential,
    f: &CausalTransform<f64>,
    interval: &IntervalBox<f64>,
    eps_list: &[f64],
    t_list: &[f64],
    dt: f64,
    opts: &AetOptions,
) -> Result<AetReport, QuantumError> {
    if spec.dim != 1 || interval.dim() != 1 {
        return Err(QuantumError::InvalidGrid("the invariance check runs on one-dimensional grids".into()));
    }
    if t_list.is_empty() || t_list.windows(2).any(|w| w[1] <= w[0]) || t_list[0] <= 0.0 {
        return Err(QuantumError::InvalidGrid("t_list must be positive and strictly increasing".into()));
    }
    let class = if opts.enforce_identity {
        let c = classify_transform(f, &default_probes(), opts.classify_tolerance, PlusSource::PreferAnalytic, RayConfig::default())?;
        if c.class != TransformClass::AsymptoticallyIdentical {
            return Err(QuantumError::NotAsymptoticallyIdentical(format!("{} classifies as {:?}", f.name(), c.class)));
        }
        Some(c.class)
    } else {
        classify_transform(f, &default_probes(), opts.classify_tolerance, PlusSource::PreferAnalytic, RayConfig::default())
            .ok()
            .map(|c| c.class)
    };
    let shrunk = eps_list.iter().map(|&e| interval.shrink(e)).collect::<Result<Vec<_>, _>>()?;
    let grown: Vec<_> = eps_list.iter().map(|&e| interval.grow(e)).collect();

    let mut state = source.state::<T>(spec)?;
    let mut prop = Propagator::new(spec, potential, dt)?;
    let x0 = source.x0[0];
    let (mut region, mut mass_transformed, mut mass_plain) = (Vec::new(), Vec::new(), Vec::new());
    let mut lower = vec![Vec::new(); eps_list.len()];
    let mut upper = vec![Vec::new(); eps_list.len()];
    for &t in t_list {
        prop.advance(&mut state, t)?;
        let (ya, yb) = transformed_section(f, interval, x0, t, opts.monotonicity_samples)?;
        region.push((ya, yb));
        mass_transformed.push(box_mass(&state, &IntervalBox::interval(ya, yb)?)?);
        mass_plain.push(box_mass(&state, &cone_section(interval, &source.x0, t))?);
        for (j, (s, g)) in shrunk.iter().zip(&grown).enumerate() {
            lower[j].push(if s.is_degenerate() { 0.0 } else { box_mass(&state, &cone_section(s, &source.x0, t))? });
            upper[j].push(box_mass(&state, &cone_section(g, &source.x0, t))?);
        }
    }

    let sandwich: Vec<SandwichRow> = eps_list
        .iter()
        .enumerate()
        .map(|(j, &eps)| {
            let holds: Vec<bool> = (0..t_list.len())
                .map(|k| lower[j][k] <= mass_transformed[k] && mass_transformed[k] <= upper[j][k])
                .collect();
            let first_tail = holds.iter().rposition(|h| !h).map_or(0, |k| k + 1);
            let t0 = (first_tail < t_list.len()).then(|| t_list[first_tail]);
            SandwichRow { eps, lower: lower[j].clone(), upper: upper[j].clone(), holds, t0 }
        })
        .collect();
    let last = t_list.len() - 1;
    let final_relative_gap = (mass_transformed[last] - mass_plain[last]).abs() / mass_plain[last].max(f64::MIN_POSITIVE);
    let violation = sandwich.iter().any(|r| !r.holds[last]) || final_relative_gap > opts.relative_tolerance;
    Ok(AetReport {
        class,
        t: t_list.to_vec(),
        region,
        mass_transformed,
        mass_plain,
        sandwich,
        final_relative_gap,
        violation,
    })
}

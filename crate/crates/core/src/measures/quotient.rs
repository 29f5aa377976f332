use serde::{Deserialize, Serialize};

use super::discrete::{BoxMeasure, DiscreteMeasure};
use super::MeasureError;
use crate::geometry::IntervalBox;

/// Translation actions on the plane; Haar measure is Lebesgue in the group parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupActionSpec {
    /// `g·(x, y) = (x, y) + g e_axis`, transversal `B = {x_axis = offset}`, window `Δ_G ⊂ ℝ`.
    TranslationsAlongAxis { axis: usize, offset: f64, window: (f64, f64) },
    /// Translations of the whole plane; the quotient is a single point and `Δ_G` a rectangle.
    #[serde(rename = "euclidean_on_v")]
    PlanarTranslations { window: [(f64, f64); 2] },
}

impl GroupActionSpec {
    pub fn along_axis(axis: usize, window: (f64, f64)) -> Self {
        Self::TranslationsAlongAxis { axis, offset: 0.0, window }
    }

    pub fn haar_mass(&self) -> f64 {
        match self {
            Self::TranslationsAlongAxis { window, .. } => window.1 - window.0,
            Self::PlanarTranslations { window } => (window[0].1 - window[0].0) * (window[1].1 - window[1].0),
        }
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        let h = self.haar_mass();
        if !(h > 0.0 && h.is_finite()) {
            return Err(MeasureError::InvalidMeasure(format!("Haar mass of Δ_G is {h}")));
        }
        if let Self::TranslationsAlongAxis { axis, offset, .. } = self {
            if *axis > 1 || !offset.is_finite() {
                return Err(MeasureError::InvalidMeasure(format!("axis {axis}, offset {offset} on the plane")));
            }
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        match self.clone() {
            Self::TranslationsAlongAxis { axis, offset, window } => {
                Self::TranslationsAlongAxis { axis, offset, window: (window.0, window.0 + 2.0 * (window.1 - window.0)) }
            }
            Self::PlanarTranslations { window } => {
                Self::PlanarTranslations { window: window.map(|(a, b)| (a, a + 2.0 * (b - a))) }
            }
        }
    }

    /// The same action with the transversal (or the window) moved by `s` along the orbits.
    fn shifted(&self, s: f64) -> Self {
        match self.clone() {
            Self::TranslationsAlongAxis { axis, offset, window } => Self::TranslationsAlongAxis { axis, offset: offset + s, window },
            Self::PlanarTranslations { window } => Self::PlanarTranslations { window: window.map(|(a, b)| (a + s, b + s)) },
        }
    }

    /// `k(Δ_B × Δ_G)` as a rectangle.
    fn slab(&self, base: &IntervalBox<f64>) -> Result<IntervalBox<f64>, MeasureError> {
        Ok(match self {
            Self::TranslationsAlongAxis { axis, offset, window } => {
                let across = 1 - axis;
                let mut lo = vec![0.0; 2];
                let mut hi = vec![0.0; 2];
                lo[*axis] = offset + window.0;
                hi[*axis] = offset + window.1;
                lo[across] = base.lo()[0];
                hi[across] = base.hi()[0];
                IntervalBox::new(lo, hi)?
            }
            Self::PlanarTranslations { window } => {
                IntervalBox::new(vec![window[0].0, window[1].0], vec![window[0].1, window[1].1])?
            }
        })
    }

    fn single_orbit(&self) -> bool {
        matches!(self, Self::PlanarTranslations { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuotientOptions {
    /// Relative tolerance of the invariance pre-check and of the window/transversal recomputations.
    pub tolerance: f64,
    /// Shifts along the orbits used by the invariance pre-check.
    pub probe_shifts: [f64; 3],
}

impl Default for QuotientOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, probe_shifts: [0.37, -1.1, 2.9] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientResult {
    /// `ν̃` on the transversal boxes (a single atom for full planar translations).
    pub measure: DiscreteMeasure,
    /// Largest relative change when `Δ_G` is doubled.
    pub window_deviation: f64,
    /// Largest relative change when the transversal is moved along the orbits.
    pub transversal_deviation: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `ν̃(Δ_B) = μ[k(Δ_B × Δ_G)] / μ_H(Δ_G)` on one-dimensional transversal boxes `base`.
pub fn quotient_measure(
    mu: &dyn BoxMeasure,
    action: &GroupActionSpec,
    base: &[IntervalBox<f64>],
    opts: &QuotientOptions,
) -> Result<QuotientResult, MeasureError> {
    action.validate()?;
    if mu.dim() != 2 {
        return Err(MeasureError::Unsupported(format!("quotients are implemented on the plane, not in {} dimensions", mu.dim())));
    }
    // The single orbit of full planar translations is represented by an atom at 0.
    let point = [IntervalBox::interval(0.0, 0.0)?];
    let base: &[IntervalBox<f64>] = if action.single_orbit() { &point } else { base };
    if base.iter().any(|b| b.dim() != 1) {
        return Err(MeasureError::InvalidMeasure("transversal boxes must be one-dimensional".into()));
    }
    let eval = |a: &GroupActionSpec| -> Result<Vec<f64>, MeasureError> {
        let h = a.haar_mass();
        base.iter().map(|b| Ok(mu.mass(&a.slab(b)?)? / h)).collect()
    };
    let nu = eval(action)?;
    for &s in &opts.probe_shifts {
        let moved = eval(&action.shifted(s))?;
        if let Some((i, d)) = nu.iter().zip(&moved).map(|(a, b)| rel(*a, *b)).enumerate().find(|(_, d)| *d > opts.tolerance) {
            return Err(MeasureError::NotInvariant(format!(
                "slab mass over transversal box {i} changes by {d:.3e} under a shift of {s}"
            )));
        }
    }
    let window_deviation = nu.iter().zip(eval(&action.doubled())?).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    let transversal_deviation =
        nu.iter().zip(eval(&action.shifted(opts.probe_shifts[0] * 3.0))?).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    if window_deviation > opts.tolerance {
        return Err(MeasureError::NotInvariant(format!("ν̃ depends on Δ_G (relative change {window_deviation:.3e})")));
    }
    let measure = DiscreteMeasure::with_dim(1, base.iter().cloned().zip(nu).collect())?;
    Ok(QuotientResult { measure, window_deviation, transversal_deviation })
}

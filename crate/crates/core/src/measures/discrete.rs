use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::geometry::IntervalBox;

/// A measure that can be evaluated on axis-aligned boxes.
pub trait BoxMeasure: Sync {
    fn dim(&self) -> usize;
    fn mass(&self, b: &IntervalBox<f64>) -> Result<f64, MeasureError>;
}

/// Finitely many boxes with masses, spread uniformly within each box. Zero-width
/// boxes are atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    dim: usize,
    support: Vec<(IntervalBox<f64>, f64)>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<(IntervalBox<f64>, f64)>) -> Result<Self, MeasureError> {
        let dim = support.first().map(|s| s.0.dim()).ok_or_else(|| MeasureError::InvalidMeasure("empty support".into()))?;
        Self::with_dim(dim, support)
    }

    /// Like [`DiscreteMeasure::new`] but accepts an empty support.
    pub fn with_dim(dim: usize, support: Vec<(IntervalBox<f64>, f64)>) -> Result<Self, MeasureError> {
        for (b, m) in &support {
            if b.dim() != dim {
                return Err(MeasureError::InvalidMeasure(format!("box of dimension {} in a {dim}-dimensional measure", b.dim())));
            }
            if !(*m >= 0.0 && m.is_finite()) {
                return Err(MeasureError::InvalidMeasure(format!("mass {m} is not a nonnegative number")));
            }
        }
        check_disjoint(&support)?;
        Ok(Self { dim, support })
    }

    /// `cells` equal boxes per axis over `window`, each carrying `density·volume`.
    pub fn uniform(window: &IntervalBox<f64>, cells: usize, density: f64) -> Result<Self, MeasureError> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(MeasureError::InvalidMeasure(format!("density {density}")));
        }
        if window.is_degenerate() {
            return Ok(Self { dim: window.dim(), support: Vec::new() });
        }
        let support = window.partition(cells).into_iter().map(|b| {
            let m = density * b.volume();
            (b, m)
        });
        Ok(Self { dim: window.dim(), support: support.collect() })
    }

    pub fn support(&self) -> &[(IntervalBox<f64>, f64)] {
        &self.support
    }

    pub fn boxes(&self) -> impl Iterator<Item = &IntervalBox<f64>> {
        self.support.iter().map(|s| &s.0)
    }

    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.support.iter().map(|s| s.1)
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|s| s.1).sum()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

fn check_disjoint(support: &[(IntervalBox<f64>, f64)]) -> Result<(), MeasureError> {
    let proper: Vec<&IntervalBox<f64>> = support.iter().map(|s| &s.0).filter(|b| !b.is_degenerate()).collect();
    let clash = |a: &IntervalBox<f64>, b: &IntervalBox<f64>| {
        a.overlap_volume(b) > 1e-12 * a.volume().min(b.volume())
    };
    if proper.first().is_some_and(|b| b.dim() == 1) {
        let mut sorted = proper.clone();
        sorted.sort_by(|a, b| a.lo()[0].total_cmp(&b.lo()[0]));
        if let Some(w) = sorted.windows(2).find(|w| clash(w[0], w[1])) {
            return Err(MeasureError::InvalidMeasure(format!("overlapping boxes {:?} and {:?}", w[0], w[1])));
        }
        return Ok(());
    }
    for i in 0..proper.len() {
        for j in (i + 1)..proper.len() {
            if clash(proper[i], proper[j]) {
                return Err(MeasureError::InvalidMeasure(format!("overlapping boxes {:?} and {:?}", proper[i], proper[j])));
            }
        }
    }
    Ok(())
}

impl BoxMeasure for DiscreteMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Mass of the support boxes weighted by their overlap fraction with `b`; atoms
    /// count when they lie in the half-open `b`.
    fn mass(&self, b: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        if b.dim() != self.dim {
            return Err(MeasureError::InvalidMeasure(format!("{}-dimensional box for a {}-dimensional measure", b.dim(), self.dim)));
        }
        Ok(self
            .support
            .iter()
            .map(|(s, m)| {
                if s.is_degenerate() {
                    if b.contains(s.lo()) { *m } else { 0.0 }
                } else {
                    m * s.overlap_volume(b) / s.volume()
                }
            })
            .sum())
    }
}

/// Lebesgue measure scaled by a constant density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMeasure {
    pub dim: usize,
    pub density: f64,
}

impl UniformMeasure {
    pub fn lebesgue(dim: usize) -> Self {
        Self { dim, density: 1.0 }
    }
}

impl BoxMeasure for UniformMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mass(&self, b: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        if b.dim() != self.dim {
            return Err(MeasureError::InvalidMeasure(format!("{}-dimensional box for a {}-dimensional measure", b.dim(), self.dim)));
        }
        Ok(self.density * b.volume())
    }
}

/// Absolutely continuous measure `g(x) dx`, integrated by tensor Gauss–Legendre
/// rules on a regular sub-partition of each box.
pub struct DensityMeasure<F> {
    dim: usize,
    density: F,
    /// Sub-intervals per axis.
    pub panels: usize,
}

impl<F: Fn(&[f64]) -> f64 + Sync> DensityMeasure<F> {
    pub fn new(dim: usize, density: F) -> Self {
        Self { dim, density, panels: 8 }
    }
}

const GL_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] =
    [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

impl<F: Fn(&[f64]) -> f64 + Sync> BoxMeasure for DensityMeasure<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mass(&self, b: &IntervalBox<f64>) -> Result<f64, MeasureError> {
        if b.dim() != self.dim {
            return Err(MeasureError::InvalidMeasure(format!("{}-dimensional box for a {}-dimensional measure", b.dim(), self.dim)));
        }
        if b.is_degenerate() {
            return Ok(0.0);
        }
        // One-dimensional nodes and weights along each axis.
        let rules: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|a| {
                let h = b.side(a) / self.panels as f64;
                (0..self.panels)
                    .flat_map(|p| {
                        let c = b.lo()[a] + (p as f64 + 0.5) * h;
                        GL_NODES.iter().zip(GL_WEIGHTS).map(move |(x, w)| (c + 0.5 * h * x, 0.5 * h * w))
                    })
                    .collect()
            })
            .collect();
        let per_axis = rules[0].len();
        let total = per_axis.pow(self.dim as u32);
        let mut point = vec![0.0; self.dim];
        let mut sum = 0.0;
        for mut idx in 0..total {
            let mut w = 1.0;
            for a in (0..self.dim).rev() {
                let (x, wa) = rules[a][idx % per_axis];
                idx /= per_axis;
                point[a] = x;
                w *= wa;
            }
            sum += w * (self.density)(&point);
        }
        Ok(sum)
    }
}

/// Uniform measure on initial momenta: density `∏ mᵢ / (2π)^k` per unit velocity volume,
/// where axis `j` belongs to particle `j / (k / N)`.
pub fn pi_c_density(dim: usize, masses: &[f64]) -> Result<f64, MeasureError> {
    if masses.is_empty() || !dim.is_multiple_of(masses.len()) || masses.iter().any(|m| !(*m > 0.0)) {
        return Err(MeasureError::InvalidMeasure(format!("{} positive masses cannot share {dim} velocity axes", masses.len())));
    }
    let per = dim / masses.len();
    Ok(masses.iter().map(|m| m.powi(per as i32)).product::<f64>() / (2.0 * PI).powi(dim as i32))
}

/// `π_C` discretised on `cells` boxes per axis over `window`.
pub fn build_pi_c(window: &IntervalBox<f64>, masses: &[f64], cells: usize) -> Result<DiscreteMeasure, MeasureError> {
    DiscreteMeasure::uniform(window, cells, pi_c_density(window.dim(), masses)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> IntervalBox<f64> {
        IntervalBox::interval(a, b).unwrap()
    }

    #[test]
    fn pi_c_examples() {
        let one = build_pi_c(&iv(-1.0, 1.0), &[1.0], 10).unwrap();
        assert!((one.total() - 2.0 / (2.0 * PI)).abs() < 1e-15);
        let two = build_pi_c(&iv(-1.0, 1.0), &[2.0], 10).unwrap();
        for ((_, a), (_, b)) in one.support().iter().zip(two.support()) {
            assert!((b - 2.0 * a).abs() < 1e-15);
        }
        assert_eq!(build_pi_c(&iv(0.5, 0.5), &[1.0], 10).unwrap().total(), 0.0);
        let pair = IntervalBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let d = pi_c_density(2, &[3.0, 5.0]).unwrap();
        assert!((d - 15.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((build_pi_c(&pair, &[3.0, 5.0], 4).unwrap().total() - 2.0 * d).abs() < 1e-14);
    }

    #[test]
    fn overlapping_support_is_rejected() {
        assert!(DiscreteMeasure::new(vec![(iv(0.0, 1.0), 1.0), (iv(0.5, 2.0), 1.0)]).is_err());
        assert!(DiscreteMeasure::new(vec![(iv(0.0, 1.0), 1.0), (iv(1.0, 2.0), 1.0)]).is_ok());
        assert!(DiscreteMeasure::new(vec![(iv(0.0, 1.0), -1.0)]).is_err());
    }

    #[test]
    fn partial_overlap_and_atoms() {
        let mu = DiscreteMeasure::new(vec![(iv(0.0, 1.0), 2.0), (iv(3.0, 3.0), 5.0)]).unwrap();
        assert!((mu.mass(&iv(0.25, 0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mu.mass(&iv(2.0, 3.0)).unwrap(), 5.0);
        assert_eq!(mu.mass(&iv(3.0, 4.0)).unwrap(), 0.0);
    }

    #[test]
    fn density_quadrature_is_exact_for_polynomials() {
        let mu = DensityMeasure::new(2, |x: &[f64]| x[0].powi(3) * x[1] + 1.0);
        let b = IntervalBox::new(vec![0.0, -1.0], vec![2.0, 3.0]).unwrap();
        // ∫₀² x³ dx · ∫₋₁³ y dy + area = 4 · 4 + 8.
        assert!((mu.mass(&b).unwrap() - 24.0).abs() < 1e-12);
    }
}

//! Classical versus quantum position densities for propagation from a point.
//!
//! `ρ_C = (2π)^{-d} Σ |∂²W_i/∂x₁∂x₂|` over classical paths, `ρ_Q = |K|²`. The
//! interference term is reported as `I = ρ_C − ρ_Q`.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Action of the free path from `(0, x1)` to `(t, x2)`.
pub fn free_action(m: f64, t: f64, x1: f64, x2: f64) -> f64 {
    m * (x2 - x1).powi(2) / (2.0 * t)
}

/// Free propagator `K(x1, x2, t) = √(m/(2πit)) exp(i m (x2−x1)²/(2t))` in one dimension.
pub fn free_propagator(m: f64, t: f64, x1: f64, x2: f64) -> Complex<f64> {
    let pre = Complex::new(0.0, -m / (2.0 * PI * t)).sqrt();
    pre * Complex::from_polar(1.0, free_action(m, t, x1, x2))
}

/// `∂²W/∂x₁∂x₂` by a central mixed difference.
pub fn mixed_action_derivative(w: impl Fn(f64, f64) -> f64, x1: f64, x2: f64) -> f64 {
    let h = 0.25 * (1.0 + x1.abs().max(x2.abs()));
    (w(x1 + h, x2 + h) - w(x1 + h, x2 - h) - w(x1 - h, x2 + h) + w(x1 - h, x2 - h)) / (4.0 * h * h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalComparison {
    pub m: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub rho_c: Vec<f64>,
    pub rho_q: Vec<f64>,
    pub interference: Vec<f64>,
}

/// Free particle in one dimension, single classical path from the origin.
pub fn semiclassical_density_compare(m: f64, t: f64, x_grid: &[f64]) -> SemiclassicalComparison {
    let w = |x1: f64, x2: f64| free_action(m, t, x1, x2);
    let rho_c: Vec<f64> = x_grid.iter().map(|&x| mixed_action_derivative(w, 0.0, x).abs() / (2.0 * PI)).collect();
    let rho_q: Vec<f64> = x_grid.iter().map(|&x| free_propagator(m, t, 0.0, x).norm_sqr()).collect();
    let interference = rho_c.iter().zip(&rho_q).map(|(c, q)| c - q).collect();
    SemiclassicalComparison { m, t, x: x_grid.to_vec(), rho_c, rho_q, interference }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSourceToy {
    pub x: Vec<f64>,
    /// `|ψ₁+ψ₂|² − |ψ₁|² − |ψ₂|²` from the propagators.
    pub direct: Vec<f64>,
    /// `(2π)^{-1} Σ_{i≠j} |W_i''|^{1/2}|W_j''|^{1/2} e^{i(W_i − W_j)}` from the actions.
    pub from_actions: Vec<f64>,
}

/// Free propagation from two point sources: interference computed two ways.
pub fn two_source_toy(m: f64, t: f64, sources: [f64; 2], x_grid: &[f64]) -> TwoSourceToy {
    let mut direct = Vec::with_capacity(x_grid.len());
    let mut from_actions = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let (p1, p2) = (free_propagator(m, t, sources[0], x), free_propagator(m, t, sources[1], x));
        direct.push((p1 + p2).norm_sqr() - p1.norm_sqr() - p2.norm_sqr());
        let w = |x1: f64, x2: f64| free_action(m, t, x1, x2);
        let paths: Vec<(f64, f64)> =
            sources.iter().map(|&s| (mixed_action_derivative(w, s, x).abs().sqrt(), free_action(m, t, s, x))).collect();
        let mut sum = Complex::new(0.0, 0.0);
        for (i, &(ai, wi)) in paths.iter().enumerate() {
            for (j, &(aj, wj)) in paths.iter().enumerate() {
                if i != j {
                    sum += Complex::from_polar(ai * aj, wi - wj);
                }
            }
        }
        from_actions.push(sum.re / (2.0 * PI));
    }
    TwoSourceToy { x: x_grid.to_vec(), direct, from_actions }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_density_at_t_two_is_one_over_four_pi() {
        let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.7).collect();
        let c = semiclassical_density_compare(1.0, 2.0, &xs);
        for (&rc, &rq) in c.rho_c.iter().zip(&c.rho_q) {
            assert!((rc - 1.0 / (4.0 * PI)).abs() < 1e-14);
            assert!((rq - 1.0 / (4.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn propagator_composes() {
        // ∫ K(0, y, t1) K(y, x, t2) dy = K(0, x, t1 + t2), checked by quadrature
        // with a Gaussian damping factor whose limit is taken analytically.
        let (m, t1, t2, x) = (1.3, 0.7, 1.1, 0.4);
        let eps = 1e-3;
        let (h, n) = (2e-3, 200_000);
        let mut s = Complex::new(0.0, 0.0);
        for k in 0..=n {
            let y = -200.0 + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += free_propagator(m, t1, 0.0, y) * free_propagator(m, t2, y, x) * (w * h * (-eps * y * y).exp());
        }
        let expect = free_propagator(m, t1 + t2, 0.0, x);
        assert!((s - expect).norm() < 1e-2 * expect.norm(), "{s} vs {expect}");
    }
}

//! Reference values computed independently of the library routes they check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::DeflectionTable;

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h)).sum();
    (f(a) + inner + f(b)) * h / 3.0
}

/// `|m/t| / 2π`.
pub fn free_density(m: f64, t: f64) -> f64 {
    (m / t).abs() / (2.0 * PI)
}

/// Initial speed whose particle leaves the plateau with asymptotic velocity `v`: `sign(v)·√(v² − 2V0/m)`.
pub fn barrier_initial_speed(m: f64, v0: f64, v: f64) -> f64 {
    v.signum() * (v * v - 2.0 * v0 / m).sqrt()
}

/// Half-width `√(2V0/m + b²)` of the velocity window reached from `[−b, b]`.
pub fn gap_window(m: f64, v0: f64, b: f64) -> f64 {
    (2.0 * v0 / m + b * b).sqrt()
}

/// First listed time with `c·ln(1 + t)/t < ε`.
pub fn log_drift_entry_time(c: f64, eps: f64, times: &[f64]) -> Option<f64> {
    times.iter().copied().find(|&t| c.abs() * (1.0 + t).ln() / t < eps)
}

/// Free cone mass of `(a, b]` at time `t` for a source `e^{−x²/4σ²}`, up to normalisation.
///
/// The position density stays Gaussian with variance `σ² + (t/2mσ)²`, so the velocity
/// `x/t` has standard deviation `√(σ² + (t/2mσ)²)/t`.
pub fn gaussian_cone_mass(a: f64, b: f64, sigma: f64, m: f64, t: f64) -> f64 {
    let sv = (sigma * sigma + (t / (2.0 * m * sigma)).powi(2)).sqrt() / t;
    simpson(|v| (-0.5 * (v / sv).powi(2)).exp(), a, b, 400)
}

/// Share of the doubling orbit of `p/q` below `1/2` over one period, by integer arithmetic.
pub fn doubling_period_frequency(p: u64, q: u64) -> (u64, u64) {
    let x0 = p % q;
    let (mut x, mut below, mut len) = (x0, 0, 0);
    loop {
        below += (2 * x < q) as u64;
        len += 1;
        x = 2 * x % q;
        if x == x0 {
            return (below, len);
        }
    }
}

/// Monte Carlo counts of deflection angles in `edges` for a uniform beam on the disk `s ≤ s_max`.
pub fn deflection_histogram(table: &DeflectionTable, samples: usize, seed: u64, edges: &[f64]) -> Vec<u64> {
    let s_max = *table.s.last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; edges.len() - 1];
    for _ in 0..samples {
        let s = s_max * rng.random::<f64>().sqrt();
        let Some((theta, _)) = table.theta_at(s) else { continue };
        let k = edges.partition_point(|&e| e <= theta);
        if k >= 1 && k < edges.len() {
            counts[k - 1] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        assert!((simpson(|x| x * x * x - x, 0.0, 2.0, 4) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn seventh_spends_two_thirds_below_half() {
        assert_eq!(doubling_period_frequency(1, 7), (2, 3));
        assert_eq!(doubling_period_frequency(0, 1), (1, 1));
    }
}

//! Closed forms for a particle released from the centre of a square barrier
//! `V = V0` on `|x| ≤ a`, and the asymptotic boundary-condition problem.

use serde::Serialize;

use super::ClassicalError;
use crate::extrapolate::{fit_power_tail, loglog_slope};
use crate::scalar::Real;

/// `√(2V0/m)`, the speed gained leaving the barrier from rest.
pub fn gap_speed<T: Real>(m: T, v0: T) -> T {
    (T::lit(2.0) * v0 / m).sqrt()
}

/// Exact position at time `t ≥ 0` for initial velocity `v_i`.
pub fn barrier_trajectory_oracle<T: Real>(m: T, v0: T, a: T, v_i: T, t: T) -> T {
    if v_i == T::zero() {
        return T::zero();
    }
    let u = v_i.abs();
    let x = if t <= a / u {
        u * t
    } else {
        a + (t - a / u) * (u * u + T::lit(2.0) * v0 / m).sqrt()
    };
    x * v_i.signum()
}

/// Closed-form `ω_V = sign(v_I)(|v_I| + √(2V0/m))`, and 0 at 0.
pub fn omega_v_barrier<T: Real>(m: T, v0: T, v_i: T) -> T {
    if v_i == T::zero() {
        return T::zero();
    }
    v_i.signum() * (v_i.abs() + gap_speed(m, v0))
}

/// `ω_V` implied by the trajectory: `sign(v_I)·√(v_I² + 2V0/m)`, and 0 at 0.
pub fn omega_v_from_trajectory<T: Real>(m: T, v0: T, v_i: T) -> T {
    if v_i == T::zero() {
        return T::zero();
    }
    v_i.signum() * (v_i * v_i + T::lit(2.0) * v0 / m).sqrt()
}

/// `Δ_C = (−∞, −g) ∪ {0} ∪ (g, ∞)` with `g = √(2V0/m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaC {
    pub gap: f64,
}

impl DeltaC {
    pub fn contains(&self, v: f64) -> bool {
        v == 0.0 || v.abs() > self.gap
    }

    /// The open components `(−∞, −g)` and `(g, ∞)` plus the isolated point.
    pub fn components(&self) -> [(f64, f64); 3] {
        [(f64::NEG_INFINITY, -self.gap), (0.0, 0.0), (self.gap, f64::INFINITY)]
    }
}

pub fn delta_c_barrier(m: f64, v0: f64) -> Result<DeltaC, ClassicalError> {
    if !(m > 0.0 && v0 > 0.0) {
        return Err(ClassicalError::InvalidSystem(format!("barrier needs m > 0 and V0 > 0 (got {m}, {v0})")));
    }
    Ok(DeltaC { gap: gap_speed(m, v0) })
}

/// Initial velocities reaching `x(t) = v t` at each requested time, and their limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryConditionSolve {
    pub v: f64,
    pub t_list: Vec<f64>,
    pub v_i_of_t: Vec<f64>,
    pub v_i_limit: f64,
    /// `|v| ≤ √(2V0/m)`: the whole range of such `v` selects the `v_I → 0` trajectory.
    pub degenerate: bool,
    /// Log-log slope of `|v_I(t)|` against `t` in the degenerate case.
    pub decay_exponent: Option<f64>,
}

/// Solves `x(t; v_I) = v t` for `v_I` at each `t` by bisection and extrapolates `t → ∞`.
///
/// `x(t; ·)` is increasing on `[0, |v|]` with `x(t; 0) = 0 < |v|t ≤ x(t; |v|)`, so the
/// root is bracketed for every `v` (the admissible boundary conditions are all of `R`).
pub fn solve_asymptotic_boundary_condition(
    m: f64,
    v0: f64,
    a: f64,
    v: f64,
    t_list: &[f64],
) -> Result<BoundaryConditionSolve, ClassicalError> {
    delta_c_barrier(m, v0)?;
    if !(a > 0.0) || !v.is_finite() {
        return Err(ClassicalError::InvalidSystem(format!("bad barrier problem a = {a}, v = {v}")));
    }
    if t_list.is_empty() || t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ClassicalError::InvalidSystem("t_list must be positive and strictly increasing".into()));
    }
    let gap = gap_speed(m, v0);
    let target = v.abs();
    let mut v_i_of_t = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if target == 0.0 {
            v_i_of_t.push(0.0);
            continue;
        }
        let g = |u: f64| barrier_trajectory_oracle(m, v0, a, u, t) - target * t;
        let (mut lo, mut hi) = (0.0, target);
        if g(hi) < 0.0 {
            return Err(ClassicalError::NoRoot(format!("no initial velocity reaches {v}·t at t = {t}")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        v_i_of_t.push(v.signum() * 0.5 * (lo + hi));
    }
    let degenerate = target <= gap;
    let last = *v_i_of_t.last().unwrap();
    let v_i_limit = match fit_power_tail(t_list, &[v_i_of_t.clone()]) {
        Some(fit) if fit.rel_ssr < 1e-6 && fit.limit[0].is_finite() => fit.limit[0],
        _ => last,
    };
    let decay_exponent = if degenerate && target > 0.0 {
        let abs: Vec<f64> = v_i_of_t.iter().map(|x| x.abs()).collect();
        loglog_slope(t_list, &abs)
    } else {
        None
    };
    Ok(BoundaryConditionSolve { v, t_list: t_list.to_vec(), v_i_of_t, v_i_limit, degenerate, decay_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_branches() {
        assert_eq!(barrier_trajectory_oracle(1.0, 0.5, 1.0, 2.0, 0.25), 0.5);
        let x = barrier_trajectory_oracle(1.0, 0.5, 1.0, 2.0, 1.0);
        assert!((x - (1.0 + 0.5 * 5f64.sqrt())).abs() < 1e-15);
        assert!((x - 2.118033988749895).abs() < 1e-12);
        assert_eq!(barrier_trajectory_oracle(1.0, 0.5, 1.0, 0.0, 7.0), 0.0);
        assert_eq!(barrier_trajectory_oracle(1.0, 0.5, 1.0, -2.0, 1.0), -x);
    }

    #[test]
    fn printed_omega_values() {
        assert_eq!(omega_v_barrier(1.0, 0.5, 0.0), 0.0);
        assert_eq!(omega_v_barrier(1.0, 0.5, 1.0), 2.0);
        assert_eq!(omega_v_barrier(1.0, 0.5, -1.0), -2.0);
        assert!((omega_v_from_trajectory(1.0, 0.5, 2.0) - 5f64.sqrt()).abs() < 1e-15);
        for s in [1.0f64, -1.0] {
            assert!((omega_v_barrier(1.0, 0.5, s * 1e-12) - s).abs() < 1e-11f64);
            assert!((omega_v_from_trajectory(1.0, 0.5, s * 1e-12) - s).abs() < 1e-11f64);
        }
    }

    #[test]
    fn delta_c_membership() {
        let d = delta_c_barrier(1.0, 0.5).unwrap();
        assert!(d.contains(1.5) && d.contains(0.0) && d.contains(-1.5));
        assert!(!d.contains(0.5) && !d.contains(-1.0) && !d.contains(1.0));
    }

    #[test]
    fn boundary_condition_cases() {
        let ts: Vec<f64> = (3..=6).flat_map(|k| [1.0, 2.0, 5.0].map(|c| c * 10f64.powi(k))).collect();
        let fast = solve_asymptotic_boundary_condition(1.0, 0.5, 1.0, 3.0, &ts).unwrap();
        assert!(!fast.degenerate);
        assert!((fast.v_i_limit - 8f64.sqrt()).abs() < 1e-6);

        let slow = solve_asymptotic_boundary_condition(1.0, 0.5, 1.0, 0.5, &ts).unwrap();
        assert!(slow.degenerate);
        for (&t, &u) in ts.iter().zip(&slow.v_i_of_t) {
            let closed = 1.0 / (t * 0.5 + 1.0);
            assert!((u - closed).abs() < 1e-3 * closed, "{t}: {u} vs {closed}");
        }
        assert!((slow.decay_exponent.unwrap() + 1.0).abs() < 0.05);

        let rest = solve_asymptotic_boundary_condition(1.0, 0.5, 1.0, 0.0, &ts).unwrap();
        assert_eq!(rest.v_i_limit, 0.0);

        let back = solve_asymptotic_boundary_condition(1.0, 0.5, 1.0, -3.0, &ts).unwrap();
        assert!((back.v_i_limit + 8f64.sqrt()).abs() < 1e-6);
    }
}

use serde::{Deserialize, Serialize};

use super::ClassicalError;
use crate::scalar::Real;

/// Radial potentials `V(r)` used for pair interactions and fixed central targets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `V0` for `r ≤ a`, zero outside.
    SquareBarrier { v0: f64, a: f64 },
    /// `V0·exp(−r²/w²)`.
    Gaussian { v0: f64, w: f64 },
    /// `q/√(r² + s²)`.
    SoftCoulomb { q: f64, s: f64 },
    /// `k/rⁿ`, singular at the origin.
    CentralRepulsivePower { k: f64, n: f64 },
}

/// Quintic smoothstep, `C²` with vanishing first and second derivatives at both ends.
fn smoothstep(xi: f64) -> (f64, f64) {
    let xi = xi.clamp(0.0, 1.0);
    let s = xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi);
    let ds = 30.0 * xi * xi * (1.0 - xi) * (1.0 - xi);
    (s, ds)
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), ClassicalError> {
        let ok = match *self {
            PotentialSpec::Zero => true,
            PotentialSpec::SquareBarrier { v0, a } => v0.is_finite() && a.is_finite() && a > 0.0,
            PotentialSpec::Gaussian { v0, w } => v0.is_finite() && w.is_finite() && w > 0.0,
            PotentialSpec::SoftCoulomb { q, s } => q.is_finite() && s.is_finite() && s > 0.0,
            PotentialSpec::CentralRepulsivePower { k, n } => k.is_finite() && k > 0.0 && n.is_finite() && n > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ClassicalError::InvalidSystem(format!("bad potential parameters: {self:?}")))
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            PotentialSpec::Zero => true,
            PotentialSpec::SquareBarrier { v0, .. } | PotentialSpec::Gaussian { v0, .. } => v0 == 0.0,
            PotentialSpec::SoftCoulomb { q, .. } => q == 0.0,
            PotentialSpec::CentralRepulsivePower { .. } => false,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, PotentialSpec::CentralRepulsivePower { .. })
    }

    /// Exact `V(r)`; the barrier keeps its sharp edge.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareBarrier { v0, a } => {
                if r <= a {
                    v0
                } else {
                    0.0
                }
            }
            PotentialSpec::Gaussian { v0, w } => v0 * (-(r * r) / (w * w)).exp(),
            PotentialSpec::SoftCoulomb { q, s } => q / (r * r + s * s).sqrt(),
            PotentialSpec::CentralRepulsivePower { k, n } => k / r.powf(n),
        }
    }

    /// Differentiable version for force evaluation. The barrier edge is replaced by
    /// a quintic ramp on `[a, a + δ]` with `δ = smoothing·a`.
    pub fn smoothed(&self, smoothing: f64) -> Radial {
        Radial { spec: self.clone(), delta: match *self {
            PotentialSpec::SquareBarrier { a, .. } => smoothing * a,
            _ => 0.0,
        } }
    }
}

/// A potential ready for force evaluation (see [`PotentialSpec::smoothed`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Radial {
    spec: PotentialSpec,
    delta: f64,
}

impl Radial {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    /// Width of the barrier ramp (zero for smooth potentials).
    pub fn ramp_width(&self) -> f64 {
        self.delta
    }

    /// Radial interval `[a, a + δ]` occupied by the barrier ramp, if any.
    pub fn ramp(&self) -> Option<(f64, f64)> {
        match self.spec {
            PotentialSpec::SquareBarrier { a, .. } if self.delta > 0.0 => Some((a, a + self.delta)),
            _ => None,
        }
    }

    pub fn value<T: Real>(&self, r: T) -> T {
        let rf = r.as_f64().abs();
        match self.spec {
            PotentialSpec::SquareBarrier { v0, a } if self.delta > 0.0 => {
                T::lit(v0 * (1.0 - smoothstep((rf - a) / self.delta).0))
            }
            PotentialSpec::Gaussian { v0, w } => {
                let (v0, w) = (T::lit(v0), T::lit(w));
                v0 * (-(r * r) / (w * w)).exp()
            }
            PotentialSpec::SoftCoulomb { q, s } => T::lit(q) / (r * r + T::lit(s * s)).sqrt(),
            PotentialSpec::CentralRepulsivePower { k, n } => T::lit(k) / r.abs().powf(T::lit(n)),
            ref other => T::lit(other.value(rf)),
        }
    }

    /// `−V′(r)/r`, so that the force on the separation `d` is `d·(−V′(|d|)/|d|)`.
    /// Finite at `r = 0` for the smooth catalog entries.
    pub fn force_over_r<T: Real>(&self, r: T) -> T {
        match self.spec {
            PotentialSpec::Zero => T::zero(),
            PotentialSpec::SquareBarrier { v0, a } => {
                let rf = r.as_f64().abs();
                if self.delta <= 0.0 || rf <= a || rf >= a + self.delta {
                    return T::zero();
                }
                let (_, ds) = smoothstep((rf - a) / self.delta);
                T::lit(v0 * ds / self.delta / rf)
            }
            PotentialSpec::Gaussian { v0, w } => {
                let (v0, w2) = (T::lit(v0), T::lit(w * w));
                T::lit(2.0) * v0 / w2 * (-(r * r) / w2).exp()
            }
            PotentialSpec::SoftCoulomb { q, s } => {
                let d2 = r * r + T::lit(s * s);
                T::lit(q) / (d2 * d2.sqrt())
            }
            PotentialSpec::CentralRepulsivePower { k, n } => {
                let r = r.abs();
                T::lit(k * n) / r.powf(T::lit(n + 2.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_force_over_r(p: &Radial, r: f64) -> f64 {
        let h = 1e-6 * r.max(1e-3);
        -(p.value(r + h) - p.value(r - h)) / (2.0 * h) / r
    }

    #[test]
    fn forces_match_finite_differences() {
        let specs = [
            PotentialSpec::Gaussian { v0: 1.3, w: 0.7 },
            PotentialSpec::SoftCoulomb { q: -2.0, s: 0.5 },
            PotentialSpec::CentralRepulsivePower { k: 1.0, n: 12.0 },
            PotentialSpec::SquareBarrier { v0: 0.5, a: 1.0 },
        ];
        for spec in specs {
            let p = spec.smoothed(1e-1);
            for r in [0.3, 0.9, 1.03, 1.07, 2.5] {
                let f: f64 = p.force_over_r(r);
                let g = numeric_force_over_r(&p, r);
                assert!((f - g).abs() <= 1e-5 * (1.0 + g.abs()), "{spec:?} at {r}: {f} vs {g}");
            }
        }
    }

    #[test]
    fn barrier_ramp_joins_plateau_and_vacuum() {
        let p = PotentialSpec::SquareBarrier { v0: 0.5, a: 1.0 }.smoothed(1e-3);
        assert_eq!(p.value(1.0f64), 0.5);
        assert_eq!(p.value(1.001f64), 0.0);
        assert_eq!(p.value(0.2f64), 0.5);
        assert!((p.ramp_width() - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"square_barrier","v0":0.5,"a":1.0}"#).unwrap();
        assert_eq!(spec, PotentialSpec::SquareBarrier { v0: 0.5, a: 1.0 });
        assert!(PotentialSpec::Gaussian { v0: 1.0, w: 0.0 }.validate().is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"square_barrier","v0":0.5}"#).is_err());
    }
}

use super::{GeometryError, Vec3};
use crate::scalar::Real;

/// Space-time point `(t, x)` of G = R × R³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint<T> {
    pub t: T,
    pub x: Vec3<T>,
}

impl<T: Real> SpaceTimePoint<T> {
    pub fn new(t: T, x: Vec3<T>) -> Result<Self, GeometryError> {
        if !t.is_finite() || !x.is_finite() {
            return Err(GeometryError::NonFinite("space-time point".into()));
        }
        Ok(Self { t, x })
    }
}

/// Geometric time grid `t_k = t0·ratio^k` up to and including `t_final`.
pub fn geometric_times<T: Real>(t0: T, t_final: T, ratio: T) -> Result<Vec<T>, GeometryError> {
    if !(t0 > T::zero()) || !(t_final > t0) || !(ratio > T::one()) {
        return Err(GeometryError::InvalidGrid(format!(
            "geometric grid needs 0 < t0 < t_final and ratio > 1 (got {t0}, {t_final}, {ratio})"
        )));
    }
    let mut ts = Vec::new();
    let mut t = t0;
    let stop = t_final / (T::one() + T::lit(1e-12));
    while t < stop {
        ts.push(t);
        t = t * ratio;
    }
    ts.push(t_final);
    Ok(ts)
}

/// A semitrajectory represented by samples with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory<T> {
    samples: Vec<(T, Vec3<T>)>,
}

impl<T: Real> SampledTrajectory<T> {
    pub fn new(samples: Vec<(T, Vec3<T>)>) -> Result<Self, GeometryError> {
        if samples.len() < 2 {
            return Err(GeometryError::TooFewSamples(samples.len()));
        }
        for (t, x) in &samples {
            if !t.is_finite() || !x.is_finite() {
                return Err(GeometryError::NonFinite(format!("sample at t = {t}")));
            }
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(GeometryError::NotIncreasing(format!("t = {} followed by t = {}", w[0].0, w[1].0)));
        }
        Ok(Self { samples })
    }

    /// Samples the curve `gamma` on the given times.
    pub fn from_fn(times: &[T], gamma: impl Fn(T) -> Vec3<T>) -> Result<Self, GeometryError> {
        Self::new(times.iter().map(|&t| (t, gamma(t))).collect())
    }

    /// Samples `gamma` on the default geometric grid (ratio 1.25) over `[t0, t_final]`.
    pub fn geometric(t0: T, t_final: T, gamma: impl Fn(T) -> Vec3<T>) -> Result<Self, GeometryError> {
        Self::from_fn(&geometric_times(t0, t_final, T::lit(1.25))?, gamma)
    }

    /// The ray `vᶜ = {v·t}` sampled geometrically on `[t0, t_final]`.
    pub fn ray(v: Vec3<T>, t0: T, t_final: T) -> Result<Self, GeometryError> {
        Self::geometric(t0, t_final, |t| v * t)
    }

    pub fn samples(&self) -> &[(T, Vec3<T>)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t0(&self) -> T {
        self.samples[0].0
    }

    pub fn origin(&self) -> SpaceTimePoint<T> {
        SpaceTimePoint { t: self.samples[0].0, x: self.samples[0].1 }
    }

    pub fn final_time(&self) -> T {
        self.samples[self.samples.len() - 1].0
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    /// Position at a sampled time, if `t` is one of the sample times.
    pub fn at(&self, t: T) -> Option<Vec3<T>> {
        self.samples
            .binary_search_by(|s| s.0.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
            .ok()
            .map(|i| self.samples[i].1)
    }

    /// Restriction to samples with `t <= t_max`.
    pub fn truncated(&self, t_max: T) -> Result<Self, GeometryError> {
        Self::new(self.samples.iter().copied().filter(|s| s.0 <= t_max).collect())
    }
}

/// N semitrajectories sharing an origin and pairwise disjoint elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct NBigBang<T> {
    origin: SpaceTimePoint<T>,
    trajectories: Vec<SampledTrajectory<T>>,
}

/// Default minimum separation used for the sampled disjointness check.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-9;

impl<T: Real> NBigBang<T> {
    pub fn new(trajectories: Vec<SampledTrajectory<T>>) -> Result<Self, GeometryError> {
        Self::with_min_separation(trajectories, T::lit(DEFAULT_MIN_SEPARATION))
    }

    pub fn with_min_separation(trajectories: Vec<SampledTrajectory<T>>, min_sep: T) -> Result<Self, GeometryError> {
        let first = trajectories.first().ok_or(GeometryError::TooFewSamples(0))?;
        let origin = first.origin();
        let tol = T::noise_floor() * (T::one() + origin.x.norm() + origin.t.abs());
        for (i, tr) in trajectories.iter().enumerate() {
            let o = tr.origin();
            if (o.t - origin.t).abs() > tol || (o.x - origin.x).norm() > tol {
                return Err(GeometryError::NotBigBang(format!("trajectory {i} does not start at the common origin")));
            }
        }
        for i in 0..trajectories.len() {
            for j in (i + 1)..trajectories.len() {
                for &(t, xi) in trajectories[i].samples().iter().skip(1) {
                    if let Some(xj) = trajectories[j].at(t) {
                        if (xi - xj).norm() < min_sep {
                            return Err(GeometryError::NotBigBang(format!(
                                "trajectories {i} and {j} meet at t = {t}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { origin, trajectories })
    }

    pub fn origin(&self) -> SpaceTimePoint<T> {
        self.origin
    }

    pub fn trajectories(&self) -> &[SampledTrajectory<T>] {
        &self.trajectories
    }

    pub fn n(&self) -> usize {
        self.trajectories.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_ends_at_final_time() {
        let ts = geometric_times(1.0, 100.0, 1.25).unwrap();
        assert_eq!(*ts.last().unwrap(), 100.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(geometric_times(0.0, 1.0, 1.25).is_err());
    }

    #[test]
    fn rejects_non_increasing_times() {
        let s = vec![(0.0, Vec3::zero()), (0.0, Vec3::unit(0))];
        assert!(matches!(SampledTrajectory::new(s), Err(GeometryError::NotIncreasing(_))));
        assert!(matches!(SampledTrajectory::<f64>::new(vec![]), Err(GeometryError::TooFewSamples(0))));
    }

    #[test]
    fn bigbang_requires_common_origin_and_disjointness() {
        let times = [0.0, 1.0, 2.0];
        let a = SampledTrajectory::from_fn(&times, |t| Vec3::new(t, 0.0, 0.0)).unwrap();
        let b = SampledTrajectory::from_fn(&times, |t| Vec3::new(-t, 0.0, 0.0)).unwrap();
        assert_eq!(NBigBang::new(vec![a.clone(), b]).unwrap().n(), 2);

        let shifted = SampledTrajectory::from_fn(&times, |t| Vec3::new(1.0 - t, 0.0, 0.0)).unwrap();
        assert!(NBigBang::new(vec![a.clone(), shifted]).is_err());

        let crossing = SampledTrajectory::from_fn(&times, |t| Vec3::new(t * (2.0 - t), 0.0, 0.0)).unwrap();
        assert!(NBigBang::new(vec![a, crossing]).is_err());
    }
}

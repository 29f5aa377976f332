use serde::{Deserialize, Serialize};

use super::{ClassicalError, PotentialSpec, Radial};
use crate::geometry::{geometric_times, NBigBang, SampledTrajectory, Vec3};
use crate::scalar::Real;

/// Interaction between particles `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub i: usize,
    pub j: usize,
    pub potential: PotentialSpec,
}

/// Masses, pair potentials and an optional fixed central target at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub masses: Vec<f64>,
    #[serde(default)]
    pub pair_potentials: Vec<PairSpec>,
    #[serde(default)]
    pub external: Option<PotentialSpec>,
}

impl SystemSpec {
    pub fn free(masses: Vec<f64>) -> Self {
        Self { masses, pair_potentials: Vec::new(), external: None }
    }

    /// One particle of mass `m` in a fixed central potential.
    pub fn single(m: f64, potential: PotentialSpec) -> Self {
        Self { masses: vec![m], pair_potentials: Vec::new(), external: Some(potential) }
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn validate(&self) -> Result<(), ClassicalError> {
        if self.masses.is_empty() {
            return Err(ClassicalError::InvalidSystem("no particles".into()));
        }
        if let Some(m) = self.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(ClassicalError::InvalidSystem(format!("mass must be positive, got {m}")));
        }
        for p in &self.pair_potentials {
            if !(p.i < p.j && p.j < self.n()) {
                return Err(ClassicalError::InvalidSystem(format!("pair ({}, {}) out of range", p.i, p.j)));
            }
            p.potential.validate()?;
        }
        if let Some(e) = &self.external {
            e.validate()?;
        }
        Ok(())
    }
}

/// Integration parameters for [`integrate_nbigbang`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Ratio of the geometric output grid.
    pub sample_ratio: f64,
    /// First positive output time; the origin is always recorded at `t = 0`.
    pub first_sample: f64,
    /// Barrier ramp width as a fraction of `a`.
    pub smoothing: f64,
    /// Largest tolerated relative energy drift before reporting an unstable step.
    pub max_drift: f64,
    /// Separation below which singular potentials count as an overlap.
    pub min_distance: f64,
    pub origin: [f64; 3],
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            t_final: 1e3,
            dt: 1e-3,
            sample_ratio: 1.25,
            first_sample: 1e-2,
            smoothing: 1e-3,
            max_drift: 1e-2,
            min_distance: 1e-6,
            origin: [0.0; 3],
        }
    }
}

/// Output of [`integrate_nbigbang`].
#[derive(Debug, Clone)]
pub struct ClassicalRun<T> {
    pub bigbang: NBigBang<T>,
    /// Largest `|E(t) − E(0)|` relative to the energy scale of the run.
    pub energy_drift: f64,
    pub final_velocities: Vec<Vec3<T>>,
}

/// Substeps per ramp width when a particle is near a smoothed barrier.
const RAMP_RESOLUTION: f64 = 32.0;
const MAX_SUBSTEPS: u32 = 1 << 16;

struct Model {
    masses: Vec<f64>,
    pairs: Vec<(usize, usize, Radial, bool)>,
    external: Option<(Radial, bool)>,
    min_distance: f64,
}

impl Model {
    fn new(sys: &SystemSpec, opts: &IntegrationOptions) -> Self {
        Self {
            masses: sys.masses.clone(),
            pairs: sys
                .pair_potentials
                .iter()
                .filter(|p| !p.potential.is_zero())
                .map(|p| (p.i, p.j, p.potential.smoothed(opts.smoothing), p.potential.is_singular()))
                .collect(),
            external: sys
                .external
                .as_ref()
                .filter(|e| !e.is_zero())
                .map(|e| (e.smoothed(opts.smoothing), e.is_singular())),
            min_distance: opts.min_distance,
        }
    }

    fn accelerations<T: Real>(&self, x: &[Vec3<T>], acc: &mut [Vec3<T>], t: T) -> Result<(), ClassicalError> {
        acc.iter_mut().for_each(|a| *a = Vec3::zero());
        for &(i, j, ref p, singular) in &self.pairs {
            let d = x[i] - x[j];
            let r = d.norm();
            if singular && r.as_f64() < self.min_distance {
                return Err(ClassicalError::ParticleOverlap { t: t.as_f64(), i, j });
            }
            let f = d * p.force_over_r(r);
            acc[i] += f / T::lit(self.masses[i]);
            acc[j] -= f / T::lit(self.masses[j]);
        }
        if let Some((p, singular)) = &self.external {
            for (i, xi) in x.iter().enumerate() {
                let r = xi.norm();
                if *singular && r.as_f64() < self.min_distance {
                    return Err(ClassicalError::ParticleOverlap { t: t.as_f64(), i, j: i });
                }
                acc[i] += *xi * (p.force_over_r(r) / T::lit(self.masses[i]));
            }
        }
        Ok(())
    }

    /// Number of substeps needed so that no particle crosses more than a small
    /// fraction of a barrier ramp per substep.
    fn substeps<T: Real>(&self, x: &[Vec3<T>], v: &[Vec3<T>], h: f64) -> u32 {
        let mut k = 1.0f64;
        let mut check = |p: &Radial, r: f64, speed: f64| {
            if let Some((lo, hi)) = p.ramp() {
                let reach = speed * h;
                if r + reach >= lo && r - reach <= hi {
                    k = k.max((reach * RAMP_RESOLUTION / (hi - lo)).ceil());
                }
            }
        };
        for (i, j, p, _) in &self.pairs {
            check(p, (x[*i] - x[*j]).norm().as_f64(), (v[*i] - v[*j]).norm().as_f64());
        }
        if let Some((p, _)) = &self.external {
            for (xi, vi) in x.iter().zip(v) {
                check(p, xi.norm().as_f64(), vi.norm().as_f64());
            }
        }
        k.min(MAX_SUBSTEPS as f64) as u32
    }

    fn energy<T: Real>(&self, x: &[Vec3<T>], v: &[Vec3<T>]) -> (f64, f64) {
        let kinetic: f64 = v.iter().zip(&self.masses).map(|(v, m)| 0.5 * m * v.dot(*v).as_f64()).sum();
        let mut potential = 0.0;
        for (i, j, p, _) in &self.pairs {
            potential += p.value((x[*i] - x[*j]).norm()).as_f64();
        }
        if let Some((p, _)) = &self.external {
            potential += x.iter().map(|xi| p.value(xi.norm()).as_f64()).sum::<f64>();
        }
        (kinetic, potential)
    }
}

fn verlet_step<T: Real>(
    model: &Model,
    x: &mut [Vec3<T>],
    v: &mut [Vec3<T>],
    acc: &mut [Vec3<T>],
    h: T,
    t: T,
) -> Result<(), ClassicalError> {
    let k = model.substeps(x, v, h.as_f64());
    if k > 1 {
        let hk = h / T::lit(k as f64);
        for s in 0..k {
            verlet_substep(model, x, v, acc, hk, t + hk * T::lit(s as f64))?;
        }
        return Ok(());
    }
    verlet_substep(model, x, v, acc, h, t)
}

fn verlet_substep<T: Real>(
    model: &Model,
    x: &mut [Vec3<T>],
    v: &mut [Vec3<T>],
    acc: &mut [Vec3<T>],
    h: T,
    t: T,
) -> Result<(), ClassicalError> {
    let half = h * T::lit(0.5);
    for ((xi, vi), ai) in x.iter_mut().zip(v.iter_mut()).zip(acc.iter()) {
        *vi += *ai * half;
        *xi += *vi * h;
    }
    model.accelerations(x, acc, t + h)?;
    for (vi, ai) in v.iter_mut().zip(acc.iter()) {
        *vi += *ai * half;
    }
    Ok(())
}

/// Integrates the equations of motion `mᵢẍᵢ = −∇ᵢV` by velocity Verlet from a common
/// origin, recording every particle on `{0} ∪` a geometric grid up to `t_final`.
pub fn integrate_nbigbang<T: Real>(
    sys: &SystemSpec,
    v_initial: &[Vec3<T>],
    opts: &IntegrationOptions,
) -> Result<ClassicalRun<T>, ClassicalError> {
    sys.validate()?;
    if v_initial.len() != sys.n() {
        return Err(ClassicalError::InvalidSystem(format!(
            "{} initial velocities for {} particles",
            v_initial.len(),
            sys.n()
        )));
    }
    if !(opts.dt > 0.0 && opts.t_final > 0.0 && opts.first_sample > 0.0 && opts.first_sample < opts.t_final) {
        return Err(ClassicalError::InvalidSystem(format!(
            "need 0 < first_sample < t_final and dt > 0 (got {}, {}, {})",
            opts.first_sample, opts.t_final, opts.dt
        )));
    }
    let model = Model::new(sys, opts);
    let n = sys.n();
    let origin = Vec3::new(T::lit(opts.origin[0]), T::lit(opts.origin[1]), T::lit(opts.origin[2]));
    let mut x = vec![origin; n];
    let mut v = v_initial.to_vec();
    let mut acc = vec![Vec3::zero(); n];
    model.accelerations(&x, &mut acc, T::zero())?;

    let (k0, p0) = model.energy(&x, &v);
    let e0 = k0 + p0;
    let scale = e0.abs().max(k0).max(p0.abs()).max(1e-300);
    let mut drift: f64 = 0.0;

    let mut sample_times = vec![0.0];
    sample_times.extend(
        geometric_times(opts.first_sample, opts.t_final, opts.sample_ratio)
            .map_err(ClassicalError::Geometry)?,
    );
    let mut samples: Vec<Vec<(T, Vec3<T>)>> = vec![vec![(T::zero(), origin)]; n];
    let mut next = 1;

    let dt = T::lit(opts.dt);
    let steps = (opts.t_final / opts.dt).ceil() as u64;
    let mut t = 0.0f64;
    for step in 0..steps {
        let h = if step + 1 == steps { opts.t_final - t } else { opts.dt };
        if h <= 0.0 {
            break;
        }
        // Output times inside this step are reached by a partial step from a copy.
        while next < sample_times.len() && sample_times[next] <= t + h {
            let ts = sample_times[next];
            let (mut xs, mut vs, mut accs) = (x.clone(), v.clone(), acc.clone());
            if ts > t {
                verlet_step(&model, &mut xs, &mut vs, &mut accs, T::lit(ts - t), T::lit(t))?;
            }
            for (p, xi) in samples.iter_mut().zip(&xs) {
                p.push((T::lit(ts), *xi));
            }
            next += 1;
        }
        verlet_step(&model, &mut x, &mut v, &mut acc, if h == opts.dt { dt } else { T::lit(h) }, T::lit(t))?;
        t = (step + 1) as f64 * opts.dt;
        if step + 1 == steps {
            t = opts.t_final;
        }
        let (k, p) = model.energy(&x, &v);
        drift = drift.max(((k + p) - e0).abs() / scale);
        if drift > opts.max_drift || !x.iter().all(|xi| xi.is_finite()) {
            return Err(ClassicalError::StepUnstable { t, drift });
        }
    }
    while next < sample_times.len() {
        for (p, xi) in samples.iter_mut().zip(&x) {
            p.push((T::lit(sample_times[next]), *xi));
        }
        next += 1;
    }
    let trajectories = samples
        .into_iter()
        .map(SampledTrajectory::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(ClassicalError::Geometry)?;
    let bigbang = NBigBang::new(trajectories).map_err(ClassicalError::Geometry)?;
    Ok(ClassicalRun { bigbang, energy_drift: drift, final_velocities: v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particles_move_on_straight_lines() {
        let sys = SystemSpec::free(vec![1.0, 2.0]);
        let vs = [Vec3::new(1.0, 0.5, 0.0), Vec3::new(-0.3, 0.0, 2.0)];
        let opts = IntegrationOptions { t_final: 100.0, dt: 0.05, ..Default::default() };
        let run = integrate_nbigbang(&sys, &vs, &opts).unwrap();
        for (tr, v) in run.bigbang.trajectories().iter().zip(vs) {
            for &(t, x) in tr.samples() {
                assert!((x - v * t).norm() < 1e-10 * (1.0 + t));
            }
            assert_eq!(tr.final_time(), 100.0);
        }
        assert_eq!(run.energy_drift, 0.0);
    }

    #[test]
    fn singular_pair_at_common_origin_overlaps() {
        let sys = SystemSpec {
            masses: vec![1.0, 1.0],
            pair_potentials: vec![PairSpec { i: 0, j: 1, potential: PotentialSpec::CentralRepulsivePower { k: 1.0, n: 1.0 } }],
            external: None,
        };
        let vs = [Vec3::<f64>::unit(0), -Vec3::unit(0)];
        let res = integrate_nbigbang(&sys, &vs, &IntegrationOptions::default());
        assert!(matches!(res, Err(ClassicalError::ParticleOverlap { .. })));
    }

    #[test]
    fn oversized_step_is_reported_unstable() {
        let sys = SystemSpec::single(1.0, PotentialSpec::Gaussian { v0: 50.0, w: 0.1 });
        let opts = IntegrationOptions { t_final: 10.0, dt: 0.05, max_drift: 1e-4, ..Default::default() };
        let res = integrate_nbigbang(&sys, &[Vec3::new(0.3, 0.0, 0.0)], &opts);
        assert!(matches!(res, Err(ClassicalError::StepUnstable { .. })), "{res:?}");
    }

    #[test]
    fn rejects_bad_masses_and_pairs() {
        assert!(SystemSpec::free(vec![1.0, -1.0]).validate().is_err());
        let sys = SystemSpec {
            masses: vec![1.0],
            pair_potentials: vec![PairSpec { i: 0, j: 1, potential: PotentialSpec::Zero }],
            external: None,
        };
        assert!(sys.validate().is_err());
    }
}

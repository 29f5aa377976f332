use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

use super::QuantumError;
use crate::classical::PotentialSpec;
use crate::scalar::Real;

/// Scalars usable on the grid: real floats with an FFT implementation.
pub trait GridScalar: Real + FftNum {}
impl<T: Real + FftNum> GridScalar for T {}

/// Fraction of the norm allowed within [`EDGE_CELLS`] of the window boundary.
pub const EDGE_TOLERANCE: f64 = 1e-6;
pub const EDGE_CELLS: usize = 4;

/// Periodic grid `x_k = c − L + kΔx`, `Δx = 2L/n`, along each of `dim` axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    /// Half-width `L` of the window.
    pub extent: f64,
    pub mass: f64,
    /// Window centre; empty means the origin.
    #[serde(default)]
    pub center: Vec<f64>,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, extent: f64, mass: f64) -> Self {
        Self { dim, n, extent, mass, center: vec![0.0; dim] }
    }

    pub fn centered_at(mut self, c: &[f64]) -> Self {
        self.center = c.to_vec();
        self
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(QuantumError::InvalidGrid(format!("dimension {} (supported: 1, 2)", self.dim)));
        }
        if self.n < 16 || !self.n.is_multiple_of(2) {
            return Err(QuantumError::InvalidGrid(format!("n = {} must be even and at least 16", self.n)));
        }
        if !(self.extent > 0.0 && self.extent.is_finite() && self.mass > 0.0 && self.mass.is_finite()) {
            return Err(QuantumError::InvalidGrid(format!("extent {} and mass {} must be positive", self.extent, self.mass)));
        }
        if !self.center.is_empty() && self.center.len() != self.dim {
            return Err(QuantumError::InvalidGrid(format!("centre has {} coordinates for d = {}", self.center.len(), self.dim)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        PI / self.extent
    }

    pub fn center(&self, axis: usize) -> f64 {
        self.center.get(axis).copied().unwrap_or(0.0)
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        self.center(axis) - self.extent + k as f64 * self.dx()
    }

    /// Momentum of FFT bin `k`.
    pub fn momentum(&self, k: usize) -> f64 {
        let k = if k < self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
        k * self.dp()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Grid point of flat index `idx` (row-major, axis 0 slowest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        if self.dim == 1 {
            [self.coord(0, idx), 0.0]
        } else {
            [self.coord(0, idx / self.n), self.coord(1, idx % self.n)]
        }
    }
}

/// Wavefunction on a [`GridSpec`] at time `t` (ħ = 1).
#[derive(Debug, Clone)]
pub struct GridState<T> {
    spec: GridSpec,
    t: f64,
    psi: Vec<Complex<T>>,
}

impl<T: GridScalar> GridState<T> {
    pub fn from_parts(spec: GridSpec, t: f64, psi: Vec<Complex<T>>) -> Result<Self, QuantumError> {
        spec.validate()?;
        if psi.len() != spec.len() {
            return Err(QuantumError::InvalidGrid(format!("{} amplitudes for {} grid points", psi.len(), spec.len())));
        }
        let spec = GridSpec { center: (0..spec.dim).map(|a| spec.center(a)).collect(), ..spec };
        Ok(Self { spec, t, psi })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> Complex<f64> + Sync) -> Result<Self, QuantumError> {
        spec.validate()?;
        let d = spec.dim;
        let psi = (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let p = spec.point(i);
                let z = f(&p[..d]);
                Complex::new(T::lit(z.re), T::lit(z.im))
            })
            .collect();
        Self::from_parts(spec, 0.0, psi)
    }

    /// Normalised Gaussian packet `∏ (2πσ²)^{-1/4} exp(−(x−x0)²/(4σ²) + i p0 x)`.
    pub fn gaussian(spec: GridSpec, x0: &[f64], sigma: f64, p0: &[f64]) -> Result<Self, QuantumError> {
        if x0.len() != spec.dim || p0.len() != spec.dim || !(sigma > 0.0) {
            return Err(QuantumError::InvalidSource(format!("packet centre/momentum must have {} components and σ > 0", spec.dim)));
        }
        let amp = (2.0 * PI * sigma * sigma).powf(-0.25);
        Self::from_fn(spec, |x| {
            x.iter().zip(x0).zip(p0).fold(Complex::new(1.0, 0.0), |acc, ((&x, &c), &p)| {
                acc * Complex::from_polar(amp * (-(x - c).powi(2) / (4.0 * sigma * sigma)).exp(), p * x)
            })
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn extent(&self) -> f64 {
        self.spec.extent
    }

    pub fn mass(&self) -> f64 {
        self.spec.mass
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }

    pub fn psi(&self) -> &[Complex<T>] {
        &self.psi
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr().as_f64()).collect()
    }

    /// `∑|ψ|²·Δx^d`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr().as_f64()).sum::<f64>() * self.spec.cell_volume()
    }

    /// Multiplies by the plane wave `exp(i m v0·x)`, shifting all velocities by `v0`.
    pub fn boost(&mut self, v0: &[f64]) -> Result<(), QuantumError> {
        if v0.len() != self.dim() {
            return Err(QuantumError::InvalidSource(format!("boost needs {} components", self.dim())));
        }
        let (spec, m, d) = (&self.spec, self.spec.mass, self.spec.dim);
        self.psi.par_iter_mut().enumerate().for_each(|(i, z)| {
            let p = spec.point(i);
            let phase: f64 = (0..d).map(|a| m * v0[a] * p[a]).sum();
            let (s, c) = phase.sin_cos();
            *z = *z * Complex::new(T::lit(c), T::lit(s));
        });
        Ok(())
    }

    /// Probability within [`EDGE_CELLS`] cells of the window boundary.
    pub fn edge_mass(&self) -> f64 {
        let n = self.n();
        let near = |k: usize| k < EDGE_CELLS || k >= n - EDGE_CELLS;
        let sum: f64 = if self.dim() == 1 {
            (0..n).filter(|&k| near(k)).map(|k| self.psi[k].norm_sqr().as_f64()).sum()
        } else {
            (0..n * n)
                .into_par_iter()
                .filter(|&i| near(i / n) || near(i % n))
                .map(|i| self.psi[i].norm_sqr().as_f64())
                .sum()
        };
        sum * self.spec.cell_volume()
    }

    /// Errors with `GridTooSmall` when the edge mass exceeds [`EDGE_TOLERANCE`] of `reference`.
    pub fn check_edges(&self, reference: f64) -> Result<(), QuantumError> {
        let edge = self.edge_mass();
        if edge > EDGE_TOLERANCE * reference {
            return Err(QuantumError::GridTooSmall { t: self.t, edge_fraction: edge / reference });
        }
        Ok(())
    }

    /// Momentum-space density `|ψ̃(p)|²` with `ψ̃(p) = (2π)^{-d/2} ∫ψ(x) e^{−ipx} dx`,
    /// indexed like the position grid but on `p_j = (j − n/2)Δp`.
    pub fn momentum_density(&self) -> Vec<f64> {
        let mut buf = self.psi.clone();
        Fourier::new(self.n(), self.dim()).forward(&mut buf);
        let scale = (self.spec.cell_volume() / (2.0 * PI).powf(self.dim() as f64 / 2.0)).powi(2);
        let n = self.n();
        let shift = |j: usize| (j + n / 2) % n;
        let mut out = vec![0.0; buf.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let src = if self.dim() == 1 { shift(i) } else { shift(i / n) * n + shift(i % n) };
            *o = buf[src].norm_sqr().as_f64() * scale;
        }
        out
    }
}

/// Forward/inverse FFT over one or two axes, unnormalised.
struct Fourier<T: FftNum> {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: GridScalar> Fourier<T> {
    fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, dim, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, buf: &mut [Complex<T>]) {
        self.apply(buf, &self.fwd);
    }

    /// Inverse transform including the `1/n^d` normalisation.
    fn inverse(&self, buf: &mut [Complex<T>]) {
        self.apply(buf, &self.inv);
        let s = T::lit(1.0 / (self.n as f64).powi(self.dim as i32));
        buf.par_iter_mut().for_each(|z| *z = *z * s);
    }

    fn apply(&self, buf: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        if self.dim == 1 {
            plan.process(buf);
            return;
        }
        let n = self.n;
        buf.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(buf, n);
        buf.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(buf, n);
    }
}

fn transpose<T: Copy + Send>(buf: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// How a radial [`PotentialSpec`] is laid onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `V(|x|)`, one particle in `d` dimensions.
    #[default]
    Central,
    /// `V(|x₁ − x₂|)` for two equal-mass particles on a line (d = 2 only).
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumPotential {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub coupling: Coupling,
}

impl QuantumPotential {
    pub fn free() -> Self {
        Self { potential: PotentialSpec::Zero, coupling: Coupling::Central }
    }

    pub fn central(potential: PotentialSpec) -> Self {
        Self { potential, coupling: Coupling::Central }
    }

    pub fn is_free(&self) -> bool {
        self.potential.is_zero()
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<(), QuantumError> {
        self.potential.validate().map_err(|e| QuantumError::InvalidGrid(e.to_string()))?;
        if self.coupling == Coupling::Pair && spec.dim != 2 {
            return Err(QuantumError::InvalidGrid("pair coupling needs d = 2".into()));
        }
        Ok(())
    }

    /// Potential sampled on the grid. Singular potentials are evaluated no closer
    /// than `Δx/2`; a 1D square barrier is cell-averaged so its width is exact.
    pub fn sample(&self, spec: &GridSpec) -> Vec<f64> {
        let dx = spec.dx();
        let floor = 0.5 * dx;
        (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let p = spec.point(i);
                let r = match (self.coupling, spec.dim) {
                    (Coupling::Pair, _) => (p[0] - p[1]).abs(),
                    (_, 1) => p[0].abs(),
                    _ => p[0].hypot(p[1]),
                };
                match self.potential {
                    PotentialSpec::SquareBarrier { v0, a } if spec.dim == 1 => {
                        let (lo, hi) = (p[0] - 0.5 * dx, p[0] + 0.5 * dx);
                        v0 * ((hi.min(a) - lo.max(-a)).max(0.0) / dx)
                    }
                    _ => self.potential.value(r.max(floor)),
                }
            })
            .collect()
    }
}

/// Strang split-step propagator for a fixed grid, potential and step size.
pub struct Propagator<T: FftNum> {
    spec: GridSpec,
    fourier: Fourier<T>,
    potential: Option<Vec<f64>>,
    dt: f64,
    p2: Vec<f64>,
    half_v: Vec<Complex<T>>,
    kinetic: Vec<Complex<T>>,
    reference_norm: Option<f64>,
}

impl<T: GridScalar> Propagator<T> {
    pub fn new(spec: &GridSpec, potential: &QuantumPotential, dt: f64) -> Result<Self, QuantumError> {
        spec.validate()?;
        potential.validate(spec)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QuantumError::InvalidGrid(format!("time step {dt} must be positive")));
        }
        let n = spec.n;
        let p2: Vec<f64> = (0..spec.len())
            .map(|i| {
                if spec.dim == 1 {
                    spec.momentum(i).powi(2)
                } else {
                    spec.momentum(i / n).powi(2) + spec.momentum(i % n).powi(2)
                }
            })
            .collect();
        let v = (!potential.is_free()).then(|| potential.sample(spec));
        let mut prop = Self {
            spec: spec.clone(),
            fourier: Fourier::new(n, spec.dim),
            potential: v,
            dt,
            p2,
            half_v: Vec::new(),
            kinetic: Vec::new(),
            reference_norm: None,
        };
        prop.half_v = prop.potential_phases(dt);
        prop.kinetic = prop.kinetic_phases(dt);
        Ok(prop)
    }

    fn kinetic_phases(&self, h: f64) -> Vec<Complex<T>> {
        let m = self.spec.mass;
        self.p2.iter().map(|&p2| phase(-p2 * h / (2.0 * m))).collect()
    }

    fn potential_phases(&self, h: f64) -> Vec<Complex<T>> {
        match &self.potential {
            Some(v) => v.iter().map(|&v| phase(-v * h / 2.0)).collect(),
            None => Vec::new(),
        }
    }

    /// Advances `state` to `t_target` (no-op if already there). Free evolution is a
    /// single exact kinetic step; otherwise Strang steps of `dt` with a final
    /// partial step. Edge mass is checked after every step.
    pub fn advance(&mut self, state: &mut GridState<T>, t_target: f64) -> Result<(), QuantumError> {
        if state.spec.dim != self.spec.dim || state.spec.n != self.spec.n || state.spec.extent != self.spec.extent {
            return Err(QuantumError::InvalidGrid("state and propagator grids differ".into()));
        }
        if t_target < state.t {
            return Err(QuantumError::InvalidGrid(format!("cannot evolve backwards from {} to {t_target}", state.t)));
        }
        let reference = *self.reference_norm.get_or_insert_with(|| state.norm());
        let remaining = t_target - state.t;
        if remaining <= 0.0 {
            return Ok(());
        }
        if self.potential.is_none() {
            let kin = self.kinetic_phases(remaining);
            self.step(state, &kin, None);
            state.t = t_target;
            return state.check_edges(reference);
        }
        let steps = (remaining / self.dt - 1e-9).ceil().max(1.0) as u64;
        let t0 = state.t;
        let kinetic = std::mem::take(&mut self.kinetic);
        let half_v = std::mem::take(&mut self.half_v);
        let mut result = Ok(());
        for k in 0..steps {
            if k + 1 == steps {
                let h = t_target - (t0 + k as f64 * self.dt);
                if (h - self.dt).abs() > 1e-12 * self.dt {
                    let (kin, hv) = (self.kinetic_phases(h), self.potential_phases(h));
                    self.step(state, &kin, Some(&hv));
                } else {
                    self.step(state, &kinetic, Some(&half_v));
                }
                state.t = t_target;
            } else {
                self.step(state, &kinetic, Some(&half_v));
                state.t = t0 + (k + 1) as f64 * self.dt;
            }
            if let Err(e) = state.check_edges(reference) {
                result = Err(e);
                break;
            }
        }
        self.kinetic = kinetic;
        self.half_v = half_v;
        result
    }

    fn step(&self, state: &mut GridState<T>, kinetic: &[Complex<T>], half_v: Option<&[Complex<T>]>) {
        let psi = &mut state.psi;
        if let Some(hv) = half_v {
            psi.par_iter_mut().zip(hv).for_each(|(z, w)| *z = *z * *w);
        }
        self.fourier.forward(psi);
        psi.par_iter_mut().zip(kinetic).for_each(|(z, w)| *z = *z * *w);
        self.fourier.inverse(psi);
        if let Some(hv) = half_v {
            psi.par_iter_mut().zip(hv).for_each(|(z, w)| *z = *z * *w);
        }
    }
}

fn phase<T: Real>(theta: f64) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(T::lit(c), T::lit(s))
}

/// Evolves a copy of `state` to `t_target` under `potential` with Strang steps of `dt`.
pub fn evolve<T: GridScalar>(
    state: &GridState<T>,
    potential: &QuantumPotential,
    t_target: f64,
    dt: f64,
) -> Result<GridState<T>, QuantumError> {
    let mut prop = Propagator::new(state.spec(), potential, dt)?;
    let mut out = state.clone();
    prop.advance(&mut out, t_target)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form free evolution of the normalised Gaussian packet at rest.
    fn free_gaussian_density(x: f64, sigma: f64, m: f64, t: f64) -> f64 {
        let s2 = sigma * sigma * (1.0 + (t / (2.0 * m * sigma * sigma)).powi(2));
        (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()
    }

    #[test]
    fn free_gaussian_spreads_like_closed_form() {
        let spec = GridSpec::new(1, 1024, 20.0, 1.0);
        let psi0 = GridState::<f64>::gaussian(spec, &[0.0], 1.0, &[0.0]).unwrap();
        for t in [0.5, 3.0] {
            let out = evolve(&psi0, &QuantumPotential::free(), t, 1.0).unwrap();
            let err = out
                .density()
                .iter()
                .enumerate()
                .map(|(k, d)| (d - free_gaussian_density(out.spec().coord(0, k), 1.0, 1.0, t)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "t = {t}: {err}");
        }
    }

    #[test]
    fn evolution_is_unitary() {
        let spec = GridSpec::new(1, 512, 30.0, 2.0);
        let psi0 = GridState::<f64>::gaussian(spec, &[-3.0], 0.7, &[1.3]).unwrap();
        let n0 = psi0.norm();
        for pot in [
            QuantumPotential::free(),
            QuantumPotential::central(PotentialSpec::SquareBarrier { v0: 2.0, a: 1.0 }),
            QuantumPotential::central(PotentialSpec::SoftCoulomb { q: 1.0, s: 0.3 }),
        ] {
            let out = evolve(&psi0, &pot, 4.0, 0.01).unwrap();
            assert!((out.norm() - n0).abs() < 1e-10 * n0, "{pot:?}");
        }
    }

    #[test]
    fn two_dimensional_fft_round_trips() {
        let f = Fourier::<f64>::new(32, 2);
        let orig: Vec<_> = (0..32 * 32).map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64).cos())).collect();
        let mut buf = orig.clone();
        f.forward(&mut buf);
        f.inverse(&mut buf);
        let err = buf.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn two_dimensional_free_packet_factorises() {
        let s2 = GridSpec::new(2, 128, 12.0, 1.0);
        let s1 = GridSpec::new(1, 128, 12.0, 1.0);
        let a = evolve(&GridState::<f64>::gaussian(s2, &[0.5, -1.0], 0.8, &[0.0, 0.0]).unwrap(), &QuantumPotential::free(), 1.5, 1.0)
            .unwrap();
        let bx = evolve(&GridState::<f64>::gaussian(s1.clone(), &[0.5], 0.8, &[0.0]).unwrap(), &QuantumPotential::free(), 1.5, 1.0)
            .unwrap();
        let by = evolve(&GridState::<f64>::gaussian(s1, &[-1.0], 0.8, &[0.0]).unwrap(), &QuantumPotential::free(), 1.5, 1.0)
            .unwrap();
        let (dx, dy) = (bx.density(), by.density());
        let err = a
            .density()
            .iter()
            .enumerate()
            .map(|(i, d)| (d - dx[i / 128] * dy[i % 128]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    /// Plane-wave transmission through `V0` on `|x| < a` (transfer-matrix result).
    fn barrier_transmission(e: f64, v0: f64, a: f64, m: f64) -> f64 {
        let q = (2.0 * m * (v0 - e).abs()).sqrt() * 2.0 * a;
        let s2 = if e < v0 { q.sinh().powi(2) } else { q.sin().powi(2) };
        1.0 / (1.0 + v0 * v0 * s2 / (4.0 * e * (v0 - e).abs()))
    }

    #[test]
    fn packet_tunnels_through_barrier_at_transfer_matrix_rate() {
        let (v0, a, m, p0, sigma) = (1.0, 0.5, 1.0, 0.7, 5.0);
        let spec = GridSpec::new(1, 4096, 204.8, m);
        let psi0 = GridState::<f64>::gaussian(spec.clone(), &[-50.0], sigma, &[p0]).unwrap();
        let pot = QuantumPotential::central(PotentialSpec::SquareBarrier { v0, a });
        let out = evolve(&psi0, &pot, 140.0, 0.02).unwrap();
        let transmitted: f64 = out
            .density()
            .iter()
            .enumerate()
            .filter(|(k, _)| spec.coord(0, *k) > a)
            .map(|(_, d)| d * spec.dx())
            .sum();
        // Average the plane-wave coefficient over the packet's momentum profile.
        let sp = 1.0 / (2.0 * sigma);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..4001 {
            let p = p0 - 8.0 * sp + 16.0 * sp * i as f64 / 4000.0;
            let w = (-(p - p0).powi(2) / (2.0 * sp * sp)).exp();
            num += w * barrier_transmission(p * p / (2.0 * m), v0, a, m);
            den += w;
        }
        let expected = num / den;
        assert!(transmitted > 0.0);
        assert!((transmitted - expected).abs() < 0.03 * expected, "{transmitted} vs {expected}");
    }

    #[test]
    fn wide_packet_on_small_grid_is_rejected() {
        let spec = GridSpec::new(1, 256, 5.0, 1.0);
        let psi0 = GridState::<f64>::gaussian(spec, &[0.0], 0.5, &[0.0]).unwrap();
        let res = evolve(&psi0, &QuantumPotential::free(), 10.0, 1.0);
        assert!(matches!(res, Err(QuantumError::GridTooSmall { .. })), "{res:?}");
    }

    #[test]
    fn boost_shifts_momentum_density() {
        let spec = GridSpec::new(1, 1024, 40.0, 2.0);
        let mut psi = GridState::<f64>::gaussian(spec.clone(), &[0.0], 1.0, &[0.0]).unwrap();
        let before = psi.momentum_density();
        // m·v0 equal to a whole number of momentum bins.
        let bins = 16;
        let v0 = bins as f64 * spec.dp() / spec.mass;
        psi.boost(&[v0]).unwrap();
        let after = psi.momentum_density();
        for j in 0..1024 - bins {
            assert!((after[j + bins] - before[j]).abs() < 1e-12);
        }
    }
}

//! Deflection function `Θ(s)` by trajectory integration in a central potential, the
//! cross-section `ρ_S = ρ_I·s/sinΘ·|∂s/∂Θ|` and its inversion for the emission density.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassicalError, PotentialSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringOptions {
    pub mass: f64,
    /// Largest impact parameter probed; the incident beam covers the disk `s ≤ s_max`.
    pub s_max: f64,
    /// Number of impact parameters on the uniform `s` grid.
    pub n_s: usize,
    /// Trajectories start and end where `|V|/E` falls below this value.
    pub tail_tolerance: f64,
    /// Step size as a fraction of the local time scale `min(r/|v|, √(r/|a|))`.
    pub step_fraction: f64,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self { mass: 1.0, s_max: 2.0, n_s: 2001, tail_tolerance: 1e-12, step_fraction: 4e-3 }
    }
}

/// Sampled deflection function on a uniform impact-parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflectionTable {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// `∂Θ/∂s` by 3-point differences.
    pub dtheta_ds: Vec<f64>,
}

fn start_radius(potential: &PotentialSpec, energy: f64, s_max: f64, tol: f64) -> f64 {
    let mut r = 2.0 * s_max.max(1e-3);
    while potential.value(r).abs() > tol * energy && r < 1e4 * s_max {
        r *= 1.25;
    }
    r
}

const MAX_STEPS: u64 = 2_000_000;

fn accel(p: &super::Radial, m: f64, x: [f64; 2]) -> [f64; 2] {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let k = p.force_over_r(r) / m;
    [k * x[0], k * x[1]]
}

/// Integrates one incoming particle (impact parameter `s`, beam along `+z`) with
/// RK4 and returns the angle between its outgoing and incoming velocities.
fn deflection(p: &super::Radial, energy: f64, m: f64, s: f64, r0: f64, frac: f64) -> Result<f64, ClassicalError> {
    let z0 = (r0 * r0 - s * s).max(0.0).sqrt();
    let ke = energy - p.spec().value(r0);
    if ke <= 0.0 {
        return Err(ClassicalError::InvalidSystem(format!("energy {energy} below the potential at the start radius")));
    }
    let mut x = [s, -z0];
    let mut v = [0.0, (2.0 * ke / m).sqrt()];
    let deriv = |x: [f64; 2], v: [f64; 2]| (v, accel(p, m, x));
    for _ in 0..MAX_STEPS {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let radial = x[0] * v[0] + x[1] * v[1];
        if r > r0 && radial > 0.0 {
            return Ok(v[0].atan2(v[1]).abs());
        }
        let a = accel(p, m, x);
        let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let amag = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let r_eff = r.max(1e-3 * r0);
        let scale = (r_eff / speed.max(1e-300)).min((r_eff / amag.max(1e-300)).sqrt());
        let h = frac * scale.min(r0);
        let (k1x, k1v) = deriv(x, v);
        let (k2x, k2v) = deriv(add(x, k1x, h / 2.0), add(v, k1v, h / 2.0));
        let (k3x, k3v) = deriv(add(x, k2x, h / 2.0), add(v, k2v, h / 2.0));
        let (k4x, k4v) = deriv(add(x, k3x, h), add(v, k3v, h));
        for c in 0..2 {
            x[c] += h / 6.0 * (k1x[c] + 2.0 * k2x[c] + 2.0 * k3x[c] + k4x[c]);
            v[c] += h / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
        }
    }
    Err(ClassicalError::Orbiting { s })
}

fn add(a: [f64; 2], b: [f64; 2], h: f64) -> [f64; 2] {
    [a[0] + h * b[0], a[1] + h * b[1]]
}

/// Tabulates `Θ(s)` on `s_k = k·s_max/(n_s − 1)`, requiring it to be strictly decreasing.
pub fn deflection_function(
    potential: &PotentialSpec,
    energy: f64,
    opts: &ScatteringOptions,
) -> Result<DeflectionTable, ClassicalError> {
    potential.validate()?;
    if !(energy > 0.0 && opts.mass > 0.0 && opts.s_max > 0.0 && opts.n_s >= 5) {
        return Err(ClassicalError::InvalidSystem("scattering needs E > 0, m > 0, s_max > 0, n_s ≥ 5".into()));
    }
    if potential.is_zero() {
        return Err(ClassicalError::NoScattering);
    }
    let r0 = start_radius(potential, energy, opts.s_max, opts.tail_tolerance);
    let p = potential.smoothed(1e-3);
    let ds = opts.s_max / (opts.n_s - 1) as f64;
    let s: Vec<f64> = (0..opts.n_s).map(|k| k as f64 * ds).collect();
    let theta = s
        .par_iter()
        .map(|&si| deflection(&p, energy, opts.mass, si, r0, opts.step_fraction))
        .collect::<Result<Vec<f64>, _>>()?;
    if theta.iter().all(|t| t.abs() < 1e-12) {
        return Err(ClassicalError::NoScattering);
    }
    if let Some(k) = theta.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(ClassicalError::NonMonotoneDeflection { s: s[k + 1] });
    }
    let n = s.len();
    let dtheta_ds = (0..n)
        .map(|k| match k {
            0 => (-3.0 * theta[0] + 4.0 * theta[1] - theta[2]) / (2.0 * ds),
            k if k == n - 1 => (3.0 * theta[k] - 4.0 * theta[k - 1] + theta[k - 2]) / (2.0 * ds),
            k => (theta[k + 1] - theta[k - 1]) / (2.0 * ds),
        })
        .collect();
    Ok(DeflectionTable { s, theta, dtheta_ds })
}

impl DeflectionTable {
    pub fn theta_range(&self) -> (f64, f64) {
        (*self.theta.last().unwrap(), self.theta[0])
    }

    /// `s(Θ)` and `|∂s/∂Θ|` by cubic Hermite interpolation of the inverse function.
    pub fn invert(&self, theta: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.theta_range();
        if !(theta >= lo && theta <= hi) {
            return None;
        }
        // θ decreases along the table; find k with θ_{k+1} ≤ θ ≤ θ_k.
        let k = self.theta.partition_point(|&t| t > theta).saturating_sub(1).min(self.s.len() - 2);
        let (t0, t1) = (self.theta[k], self.theta[k + 1]);
        let (s0, s1) = (self.s[k], self.s[k + 1]);
        let (d0, d1) = (1.0 / self.dtheta_ds[k], 1.0 / self.dtheta_ds[k + 1]);
        let h = t1 - t0;
        let u = (theta - t0) / h;
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let s = h00 * s0 + h10 * h * d0 + h01 * s1 + h11 * h * d1;
        let dh00 = (6.0 * u * u - 6.0 * u) / h;
        let dh10 = 3.0 * u * u - 4.0 * u + 1.0;
        let dh01 = (-6.0 * u * u + 6.0 * u) / h;
        let dh11 = 3.0 * u * u - 2.0 * u;
        let dsdt = dh00 * s0 + dh10 * d0 + dh01 * s1 + dh11 * d1;
        Some((s.max(0.0), dsdt.abs()))
    }

    /// `Θ(s)` by linear interpolation.
    pub fn theta_at(&self, s: f64) -> Option<(f64, f64)> {
        let ds = self.s[1] - self.s[0];
        if !(s >= 0.0 && s <= *self.s.last().unwrap()) {
            return None;
        }
        let k = ((s / ds) as usize).min(self.s.len() - 2);
        let u = (s - self.s[k]) / ds;
        Some((
            self.theta[k] + u * (self.theta[k + 1] - self.theta[k]),
            self.dtheta_ds[k] + u * (self.dtheta_ds[k + 1] - self.dtheta_ds[k]),
        ))
    }
}

fn simpson(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    if n < 3 {
        return ys.iter().sum::<f64>() * h;
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut acc = ys[0] + ys[m - 1];
    for (k, y) in ys.iter().enumerate().take(m - 1).skip(1) {
        acc += if k % 2 == 1 { 4.0 * y } else { 2.0 * y };
    }
    let mut total = acc * h / 3.0;
    if m < n {
        total += 0.5 * h * (ys[n - 2] + ys[n - 1]);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionResult {
    pub theta_grid: Vec<f64>,
    /// `σ(Θ) = ρ_S(Θ)/I` with `I` the mean incident intensity over the probed disk.
    pub sigma: Vec<f64>,
    pub rho_s: Vec<f64>,
    /// Incident density sampled on the impact-parameter grid.
    pub rho_i: Vec<f64>,
    pub intensity: f64,
    pub table: DeflectionTable,
}

impl CrossSectionResult {
    /// Geometric capture area `π s_max²` of the probed beam.
    pub fn capture_area(&self) -> f64 {
        std::f64::consts::PI * self.table.s.last().unwrap().powi(2)
    }
}

/// `ρ_S(Θ) = ρ_I(s)·s/sinΘ·|∂s/∂Θ|` on `theta_grid` for an azimuthally symmetric beam.
///
/// Angles outside the range reached from the probed disk get zero density.
pub fn classical_cross_section(
    potential: &PotentialSpec,
    energy: f64,
    rho_i: &(dyn Fn(f64) -> f64 + Sync),
    theta_grid: &[f64],
    opts: &ScatteringOptions,
) -> Result<CrossSectionResult, ClassicalError> {
    let table = deflection_function(potential, energy, opts)?;
    Ok(cross_section_from_table(table, rho_i, theta_grid))
}

/// [`classical_cross_section`] on a precomputed deflection table.
pub fn cross_section_from_table(
    table: DeflectionTable,
    rho_i: &(dyn Fn(f64) -> f64 + Sync),
    theta_grid: &[f64],
) -> CrossSectionResult {
    let rho_i_s: Vec<f64> = table.s.iter().map(|&s| rho_i(s)).collect();
    let ds = table.s[1] - table.s[0];
    let s_max = *table.s.last().unwrap();
    let weighted: Vec<f64> = rho_i_s.iter().zip(&table.s).map(|(r, s)| r * s).collect();
    let intensity = 2.0 * simpson(&weighted, ds) / (s_max * s_max);
    let rho_s: Vec<f64> = theta_grid
        .iter()
        .map(|&th| match table.invert(th) {
            Some((s, dsdt)) => {
                let sin = th.sin();
                let ratio = if sin.abs() < 1e-12 || s < 1e-12 { dsdt } else { s / sin };
                rho_i(s) * ratio * dsdt
            }
            None => 0.0,
        })
        .collect();
    let sigma = rho_s.iter().map(|r| if intensity > 0.0 { r / intensity } else { 0.0 }).collect();
    CrossSectionResult { theta_grid: theta_grid.to_vec(), sigma, rho_s, rho_i: rho_i_s, intensity, table }
}

/// Emission density `ρ_E(θ)` on `θ = s/|z0|` that produces the scattered density `rho_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionDensity {
    pub theta: Vec<f64>,
    pub rho_e: Vec<f64>,
    pub z0: f64,
    pub table: DeflectionTable,
}

impl EmissionDensity {
    /// `ρ_I(s) = ρ_E(s/|z0|)` by linear interpolation.
    pub fn incident(&self, s: f64) -> f64 {
        let th = s / self.z0.abs();
        let dt = self.theta[1] - self.theta[0];
        if !(th >= 0.0 && th <= *self.theta.last().unwrap()) {
            return 0.0;
        }
        let k = ((th / dt) as usize).min(self.theta.len() - 2);
        let u = (th - self.theta[k]) / dt;
        self.rho_e[k] + u * (self.rho_e[k + 1] - self.rho_e[k])
    }
}

/// Inverts the cross-section relation: `ρ_I(s) = ρ_S(Θ(s))·sinΘ(s)·|∂Θ/∂s|/s`, then
/// `ρ_E(θ) = ρ_I(θ|z0|)`.
pub fn reverse_emission_density(
    potential: &PotentialSpec,
    energy: f64,
    rho_s: &(dyn Fn(f64) -> f64 + Sync),
    z0: f64,
    opts: &ScatteringOptions,
) -> Result<EmissionDensity, ClassicalError> {
    if !(z0.is_finite() && z0 != 0.0) {
        return Err(ClassicalError::InvalidSystem("source distance z0 must be nonzero".into()));
    }
    let table = deflection_function(potential, energy, opts)?;
    let rho_e = table
        .s
        .iter()
        .zip(&table.theta)
        .zip(&table.dtheta_ds)
        .map(|((&s, &th), &d)| {
            let jac = if s < 1e-12 { d * d } else { th.sin() * d.abs() / s };
            rho_s(th) * jac
        })
        .collect();
    let theta = table.s.iter().map(|s| s / z0.abs()).collect();
    Ok(EmissionDensity { theta, rho_e, z0, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steep() -> PotentialSpec {
        PotentialSpec::CentralRepulsivePower { k: 1.0, n: 12.0 }
    }

    #[test]
    fn head_on_bounces_back_and_grazing_passes() {
        let t = deflection_function(&steep(), 1.0, &ScatteringOptions { n_s: 41, ..Default::default() }).unwrap();
        assert!((t.theta[0] - std::f64::consts::PI).abs() < 1e-9);
        // Small-angle limit for k/rⁿ: Θ ≈ √π Γ((n+1)/2)/Γ(n/2)·k/(E sⁿ).
        let small = std::f64::consts::PI.sqrt() * 287.88527781504433 / 120.0 / 2f64.powi(12);
        assert!((t.theta.last().unwrap() / small - 1.0).abs() < 0.02, "{}", t.theta.last().unwrap());
    }

    #[test]
    fn zero_potential_and_zero_beam() {
        let opts = ScatteringOptions { n_s: 21, ..Default::default() };
        assert!(matches!(deflection_function(&PotentialSpec::Zero, 1.0, &opts), Err(ClassicalError::NoScattering)));
        let res = classical_cross_section(&steep(), 1.0, &|_| 0.0, &[0.5, 1.0, 2.0], &opts).unwrap();
        assert!(res.sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn attractive_well_is_not_monotone() {
        let opts = ScatteringOptions { n_s: 81, s_max: 3.0, ..Default::default() };
        let res = deflection_function(&PotentialSpec::Gaussian { v0: -0.3, w: 1.0 }, 1.0, &opts);
        assert!(matches!(res, Err(ClassicalError::NonMonotoneDeflection { .. })), "{res:?}");
    }

    #[test]
    fn inversion_matches_table_nodes() {
        let t = deflection_function(&steep(), 1.0, &ScatteringOptions { n_s: 201, ..Default::default() }).unwrap();
        for k in [10, 50, 90] {
            let (s, _) = t.invert(t.theta[k]).unwrap();
            assert!((s - t.s[k]).abs() < 1e-9);
        }
    }
}

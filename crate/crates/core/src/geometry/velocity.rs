//! Asymptotic velocity `ω(γ) = lim γ(t)/t` of a sampled semitrajectory.
//!
//! The last stretch of the sample range is split into three log-equal windows
//! (one decade each when the range allows). Within each window `γ(t)/t` is fitted
//! by `v + c·t^(−p)`; the fit is used only when it explains the window to within
//! [`FIT_ACCEPT`] relative residual, otherwise the raw ratio at the window end is
//! used. The envelope `sup |γ(t)/t − v̂|` must shrink from window to window at
//! least like `t^(−1/4)`, or the trajectory is reported as not converging.

use super::{GeometryError, SampledTrajectory, Vec3};
use crate::extrapolate::fit_power_tail;
use crate::scalar::Real;

/// Relative residual below which the tail model is trusted for extrapolation.
pub const FIT_ACCEPT: f64 = 1e-3;
/// Slowest envelope decay exponent accepted as convergence.
pub const MIN_DECAY_EXPONENT: f64 = 0.25;
const MIN_WINDOW_SAMPLES: usize = 3;

/// Estimate for one window of the sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate<T> {
    pub t_start: T,
    pub t_end: T,
    pub value: Vec3<T>,
    /// `sup |γ(t)/t − v̂|` over the window, measured against the final estimate.
    pub envelope: T,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticVelocityEstimate<T> {
    pub value: Vec3<T>,
    /// Estimated `|γ(T)/T − v|` at the largest sampled time.
    pub residual: T,
    /// Successive window estimates differ by less than the requested tolerance.
    pub converged: bool,
    pub final_time: T,
    /// Windows ordered from the latest (index 0) backwards.
    pub windows: Vec<WindowEstimate<T>>,
}

fn window_estimate(ts: &[f64], us: &[[f64; 3]], xs: &[[f64; 3]]) -> ([f64; 3], bool, f64) {
    let series: Vec<Vec<f64>> = (0..3).map(|c| us.iter().map(|u| u[c]).collect()).collect();
    let last = us[us.len() - 1];
    let t_end = ts[ts.len() - 1];
    if let Some(fit) = fit_power_tail(ts, &series) {
        if fit.rel_ssr < FIT_ACCEPT && fit.limit.iter().all(|l| l.is_finite()) {
            let v = [fit.limit[0], fit.limit[1], fit.limit[2]];
            let res = norm(sub(last, v));
            return (v, true, res);
        }
    }
    // Raw ratio; the residual is sup|γ(t) − v t| / T.
    let c = xs
        .iter()
        .zip(ts)
        .map(|(x, &t)| norm(sub(*x, scale(last, t))))
        .fold(0.0, f64::max);
    (last, false, c / t_end)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Estimates the asymptotic velocity of `traj`.
///
/// `tol` bounds the difference between the two latest window estimates for the
/// estimate to be flagged `converged`. Errors with [`GeometryError::NotConverged`]
/// when the envelope fails to decay, and [`GeometryError::TooFewSamples`] when the
/// positive-time samples span less than a decade or a window holds fewer than
/// three samples.
pub fn estimate_asymptotic_velocity<T: Real>(
    traj: &SampledTrajectory<T>,
    tol: T,
) -> Result<AsymptoticVelocityEstimate<T>, GeometryError> {
    let pts: Vec<(f64, [f64; 3])> = traj
        .samples()
        .iter()
        .filter(|s| s.0 > T::zero())
        .map(|(t, x)| (t.as_f64(), [x.x.as_f64(), x.y.as_f64(), x.z.as_f64()]))
        .collect();
    if pts.len() < 3 * MIN_WINDOW_SAMPLES {
        return Err(GeometryError::TooFewSamples(pts.len()));
    }
    let t_first = pts[0].0;
    let t_last = pts[pts.len() - 1].0;
    let range = (t_last / t_first).ln();
    if range < 10f64.ln() * (1.0 - 1e-9) {
        return Err(GeometryError::TooFewSamples(pts.len()));
    }
    let width = (range / 3.0).min(10f64.ln());

    struct Raw {
        t_start: f64,
        t_end: f64,
        idx: Vec<usize>,
        value: [f64; 3],
        extrapolated: bool,
        residual: f64,
    }
    let mut raws = Vec::with_capacity(3);
    for j in 0..3 {
        let t_end = t_last * (-(j as f64) * width).exp();
        let t_start = t_last * (-((j + 1) as f64) * width).exp();
        let lo = t_start * (1.0 - 1e-12);
        let hi = t_end * (1.0 + 1e-12);
        let idx: Vec<usize> = (0..pts.len()).filter(|&k| pts[k].0 >= lo && pts[k].0 <= hi).collect();
        if idx.len() < MIN_WINDOW_SAMPLES {
            return Err(GeometryError::TooFewSamples(idx.len()));
        }
        let ts: Vec<f64> = idx.iter().map(|&k| pts[k].0).collect();
        let xs: Vec<[f64; 3]> = idx.iter().map(|&k| pts[k].1).collect();
        let us: Vec<[f64; 3]> = idx.iter().map(|&k| scale(pts[k].1, 1.0 / pts[k].0)).collect();
        let (value, extrapolated, residual) = window_estimate(&ts, &us, &xs);
        raws.push(Raw { t_start, t_end, idx, value, extrapolated, residual });
    }

    let v_hat = raws[0].value;
    let envelopes: Vec<f64> = raws
        .iter()
        .map(|w| {
            w.idx
                .iter()
                .map(|&k| norm(sub(scale(pts[k].1, 1.0 / pts[k].0), v_hat)))
                .fold(0.0, f64::max)
        })
        .collect();
    let u_scale = 1.0 + pts.iter().map(|(t, x)| norm(scale(*x, 1.0 / t))).fold(0.0, f64::max);
    // Envelopes below √ε of the velocity scale are indistinguishable from rounding.
    let floor = T::epsilon().as_f64().sqrt() * u_scale;
    if envelopes[2] > floor {
        let monotone = envelopes[0] <= envelopes[1].max(floor) && envelopes[1] <= envelopes[2];
        let required = envelopes[2] * (-2.0 * width * MIN_DECAY_EXPONENT).exp();
        if !monotone || envelopes[0] > required.max(floor) {
            return Err(GeometryError::NotConverged(format!(
                "envelope of γ(t)/t does not decay over the last windows: {:.3e}, {:.3e}, {:.3e}",
                envelopes[2], envelopes[1], envelopes[0]
            )));
        }
    }

    let to_vec = |a: [f64; 3]| Vec3::new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2]));
    let step = norm(sub(raws[0].value, raws[1].value));
    let windows = raws
        .iter()
        .zip(&envelopes)
        .map(|(w, &e)| WindowEstimate {
            t_start: T::lit(w.t_start),
            t_end: T::lit(w.t_end),
            value: to_vec(w.value),
            envelope: T::lit(e),
            extrapolated: w.extrapolated,
        })
        .collect();
    Ok(AsymptoticVelocityEstimate {
        value: to_vec(v_hat),
        residual: T::lit(raws[0].residual),
        converged: step < tol.as_f64(),
        final_time: traj.final_time(),
        windows,
    })
}

/// One row of the per-decade report: the estimate using samples up to `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecadeRow<T> {
    pub t_end: T,
    pub value: Vec3<T>,
    pub residual: T,
}

/// Runs the estimator on prefixes of `traj` ending at successive decades and at
/// the final time. Prefixes too short to analyse are skipped; a non-converging
/// prefix aborts with its error.
pub fn decade_estimates<T: Real>(traj: &SampledTrajectory<T>, tol: T) -> Result<Vec<DecadeRow<T>>, GeometryError> {
    let first = traj
        .samples()
        .iter()
        .map(|s| s.0)
        .find(|&t| t > T::zero())
        .ok_or(GeometryError::TooFewSamples(0))?;
    let mut ends = Vec::new();
    let mut t = first * T::lit(10.0);
    while t < traj.final_time() {
        ends.push(t);
        t = t * T::lit(10.0);
    }
    ends.push(traj.final_time());
    let mut rows = Vec::new();
    for t_end in ends {
        let prefix = match traj.truncated(t_end * (T::one() + T::lit(1e-9))) {
            Ok(p) => p,
            Err(_) => continue,
        };
        match estimate_asymptotic_velocity(&prefix, tol) {
            Ok(est) => rows.push(DecadeRow { t_end: prefix.final_time(), value: est.value, residual: est.residual }),
            Err(GeometryError::TooFewSamples(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(GeometryError::TooFewSamples(traj.len()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_is_exact() {
        let v = Vec3::new(0.3, -1.2, 2.0);
        let tr = SampledTrajectory::ray(v, 1.0, 1e3).unwrap();
        let est = estimate_asymptotic_velocity(&tr, 1e-9).unwrap();
        assert!((est.value - v).norm() < 1e-12);
        assert!(est.converged);
    }

    #[test]
    fn offset_line_is_extrapolated() {
        let v = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(5.0, -3.0, 1.0);
        let tr = SampledTrajectory::geometric(1.0, 1e3, |t| v * t + b).unwrap();
        let est = estimate_asymptotic_velocity(&tr, 1e-6).unwrap();
        assert!((est.value - v).norm() < 1e-9, "{:?}", est.value);
        assert!(est.windows[0].extrapolated);
    }

    #[test]
    fn short_range_is_rejected() {
        let tr = SampledTrajectory::ray(Vec3::unit(0), 1.0, 5.0).unwrap();
        assert!(matches!(estimate_asymptotic_velocity(&tr, 1e-3), Err(GeometryError::TooFewSamples(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let v = Vec3::new(1.0f32, 2.0, -1.0);
        let tr = SampledTrajectory::geometric(1.0f32, 1e4, |t| v * t + Vec3::new(0.5, 0.0, 0.0)).unwrap();
        let est = estimate_asymptotic_velocity(&tr, 1e-3).unwrap();
        assert!((est.value - v).norm() < 1e-4);
    }

    #[test]
    fn decade_rows_cover_range() {
        let tr = SampledTrajectory::geometric(1.0, 1e4, |t: f64| Vec3::new(t + t.sin(), 0.0, 0.0)).unwrap();
        let rows = decade_estimates(&tr, 1e-2).unwrap();
        assert!(rows.len() >= 3);
        assert_eq!(rows.last().unwrap().t_end, 1e4);
        assert!(rows.windows(2).all(|w| w[1].t_end > w[0].t_end));
    }
}

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discrete::{build_pi_c, BoxMeasure};
use super::map::{pushforward, MeasurableMap, PushforwardOptions};
use super::transfer::{flow_image, QuantumEta, TimeIndexedMeasure};
use super::MeasureError;
use crate::classical::{barrier_flow, PotentialSpec};
use crate::geometry::IntervalBox;
use crate::quantum::{GridSpec, PointSourceSpec, QuantumPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcdicConfig {
    pub mass: f64,
    /// `zero` or a `square_barrier` centred on the source.
    pub potential: PotentialSpec,
    /// Velocity intervals `(lo, hi]`, pairwise disjoint.
    pub boxes: Vec<(f64, f64)>,
    pub grid: GridSpec,
    pub sigmas: Vec<f64>,
    pub t_list: Vec<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdicRow {
    pub lo: f64,
    pub hi: f64,
    pub pi_c: f64,
    pub pi_q: f64,
    pub mu_c: f64,
    pub mu_q: f64,
    /// `π_Q − π_C`.
    pub gap: f64,
    /// Largest of the last-step change in `t` and the `σ → 0` correction, over `π_Q` and `μ_Q`.
    pub convergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdicReport {
    pub sigmas: Vec<f64>,
    pub t_final: f64,
    pub rows: Vec<NcdicRow>,
}

fn flow(m: f64, potential: &PotentialSpec) -> Result<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>, MeasureError> {
    match *potential {
        PotentialSpec::Zero => Ok(Box::new(|t, v| v * t)),
        PotentialSpec::SquareBarrier { v0, a } if v0 >= 0.0 && a > 0.0 => Ok(Box::new(barrier_flow(m, v0, a))),
        ref p => Err(MeasureError::Unsupported(format!("no closed-form flow for {p:?}"))),
    }
}

fn omega_v(m: f64, potential: &PotentialSpec) -> MeasurableMap {
    match *potential {
        PotentialSpec::SquareBarrier { v0, .. } => MeasurableMap::barrier_omega_v(m, v0),
        _ => MeasurableMap::identity(1),
    }
}

/// Per σ: final-time `(π_Q, μ_Q)` per box and their last-step changes.
struct SigmaRun {
    pi_q: Vec<f64>,
    mu_q: Vec<f64>,
    change: Vec<f64>,
}

fn run_sigma(cfg: &NcdicConfig, sigma: f64, boxes: &[IntervalBox<f64>]) -> Result<SigmaRun, MeasureError> {
    let x_t = flow(cfg.mass, &cfg.potential)?;
    let source = PointSourceSpec::at_origin(1, sigma);
    let mut grid = cfg.grid.clone();
    grid.mass = cfg.mass;
    let mut eta = QuantumEta::new(&grid, &source, &QuantumPotential::central(cfg.potential.clone()), cfg.dt)?;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut change = vec![0.0; boxes.len()];
    let mut cur = (Vec::new(), Vec::new());
    for &t in &cfg.t_list {
        eta.advance(t)?;
        let mut pi_q = Vec::with_capacity(boxes.len());
        for b in boxes {
            let (lo, hi) = flow_image(x_t.as_ref(), t, b)?;
            pi_q.push(eta.mass_at(t, &IntervalBox::interval(lo, hi)?)?);
        }
        let cone = eta.cone_measure();
        let mu_q = boxes.iter().map(|b| cone.mass(b)).collect::<Result<Vec<_>, _>>()?;
        if let Some((p, q)) = &prev {
            for (i, c) in change.iter_mut().enumerate() {
                *c = (pi_q[i] - p[i]).abs().max((mu_q[i] - q[i]).abs());
            }
        }
        cur = (pi_q.clone(), mu_q.clone());
        prev = Some((pi_q, mu_q));
    }
    Ok(SigmaRun { pi_q: cur.0, mu_q: cur.1, change })
}

/// Linear extrapolation in `σ²` to `σ = 0` through `(s1, m1)` and `(s2, m2)`.
fn richardson(s1: f64, m1: f64, s2: f64, m2: f64) -> f64 {
    let (a, b) = (s1 * s1, s2 * s2);
    (a * m2 - b * m1) / (a - b)
}

/// Per-box table of `π_C`, `π_Q` (corrected transfer), `μ_C = ω_V(π_C)` and `μ_Q` for
/// one particle on a line released at the origin.
pub fn ncdic_report(cfg: &NcdicConfig) -> Result<NcdicReport, MeasureError> {
    if !(cfg.mass > 0.0) {
        return Err(MeasureError::InvalidMeasure(format!("mass {}", cfg.mass)));
    }
    if cfg.grid.dim != 1 {
        return Err(MeasureError::Unsupported("the NCDIC table is computed for one particle on a line".into()));
    }
    flow(cfg.mass, &cfg.potential).map(drop)?;
    if cfg.sigmas.is_empty() || cfg.t_list.is_empty() {
        return Err(MeasureError::InvalidMeasure("σ ladder and time list must be non-empty".into()));
    }
    if cfg.t_list.iter().any(|t| !(*t > 0.0)) || cfg.t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::InvalidMeasure("t_list must be positive and strictly increasing".into()));
    }
    let boxes = cfg.boxes.iter().map(|&(a, b)| IntervalBox::interval(a, b)).collect::<Result<Vec<_>, _>>()?;
    let proper: Vec<usize> = (0..boxes.len()).filter(|&i| !boxes[i].is_degenerate()).collect();
    let active: Vec<IntervalBox<f64>> = proper.iter().map(|&i| boxes[i].clone()).collect();

    let mut sigmas = cfg.sigmas.clone();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    let runs = sigmas.par_iter().map(|&s| run_sigma(cfg, s, &active)).collect::<Result<Vec<_>, _>>()?;

    let k = runs.len();
    let extrapolate = |pick: fn(&SigmaRun) -> &Vec<f64>, j: usize| -> (f64, f64) {
        let fine = pick(&runs[k - 1])[j];
        if k < 2 {
            return (fine, 0.0);
        }
        let value = richardson(sigmas[k - 2], pick(&runs[k - 2])[j], sigmas[k - 1], fine);
        (value, (value - fine).abs())
    };

    let reach = cfg.boxes.iter().flat_map(|&(a, b)| [a.abs(), b.abs()]).fold(0.0, f64::max) + 1.0;
    let pi_c_fine = build_pi_c(&IntervalBox::interval(-reach, reach)?, &[cfg.mass], 64)?;
    let mu_c = if active.is_empty() {
        Vec::new()
    } else {
        pushforward(&pi_c_fine, &omega_v(cfg.mass, &cfg.potential), &active, &PushforwardOptions::default())?
            .measure
            .masses()
            .collect()
    };

    let mut rows: Vec<NcdicRow> = boxes
        .iter()
        .map(|b| NcdicRow { lo: b.lo()[0], hi: b.hi()[0], pi_c: 0.0, pi_q: 0.0, mu_c: 0.0, mu_q: 0.0, gap: 0.0, convergence: 0.0 })
        .collect();
    for (j, &i) in proper.iter().enumerate() {
        let (pi_q, e1) = extrapolate(|r| &r.pi_q, j);
        let (mu_q, e2) = extrapolate(|r| &r.mu_q, j);
        let row = &mut rows[i];
        row.pi_c = cfg.mass * boxes[i].volume() / (2.0 * PI);
        row.pi_q = pi_q;
        row.mu_q = mu_q;
        row.mu_c = mu_c[j];
        row.gap = pi_q - row.pi_c;
        row.convergence = e1.max(e2).max(runs[k - 1].change[j]);
    }
    Ok(NcdicReport { sigmas, t_final: *cfg.t_list.last().unwrap(), rows })
}

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discrete::{BoxMeasure, DiscreteMeasure};
use super::MeasureError;
use crate::classical::omega_v_from_trajectory;
use crate::geometry::IntervalBox;

type PointFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A point map `f: A → B` between velocity spaces, evaluated on box samples.
#[derive(Clone)]
pub struct MeasurableMap {
    name: String,
    dim_in: usize,
    dim_out: usize,
    domain: Option<IntervalBox<f64>>,
    forward: PointFn,
    admits_pullback: bool,
}

impl fmt::Debug for MeasurableMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasurableMap")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("domain", &self.domain)
            .field("admits_pullback", &self.admits_pullback)
            .finish()
    }
}

impl MeasurableMap {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        forward: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim_in, dim_out, domain: None, forward: Arc::new(forward), admits_pullback: true }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("identity", dim, dim, |x| x.to_vec())
    }

    pub fn scale(dim: usize, s: f64) -> Self {
        Self::new(format!("scale({s})"), dim, dim, move |x| x.iter().map(|v| s * v).collect())
    }

    /// Initial to asymptotic velocity for a particle released at the centre of a
    /// square barrier of height `v0`.
    pub fn barrier_omega_v(m: f64, v0: f64) -> Self {
        Self::new(format!("omega_v(m={m}, V0={v0})"), 1, 1, move |x| vec![omega_v_from_trajectory(m, v0, x[0])])
    }

    /// Restricts the map to a closed domain box; evaluation outside it is an error.
    pub fn with_domain(mut self, domain: IntervalBox<f64>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn without_pullback(mut self) -> Self {
        self.admits_pullback = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn admits_pullback(&self) -> bool {
        self.admits_pullback
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, MeasureError> {
        if let Some(d) = &self.domain {
            if !d.contains_closed(x, 1e-12) {
                return Err(MeasureError::InvalidMeasure(format!("{x:?} is outside the domain of {}", self.name)));
            }
        }
        let y = (self.forward)(x);
        if y.len() != self.dim_out || y.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::InvalidMeasure(format!("{} is not total at {x:?}", self.name)));
        }
        Ok(y)
    }

    /// Images of the corners and the centre of `b`.
    fn sample(&self, b: &IntervalBox<f64>) -> Result<Vec<Vec<f64>>, MeasureError> {
        let d = b.dim();
        let mut out = Vec::with_capacity((1 << d) + 1);
        for mask in 0..(1usize << d) {
            let p: Vec<f64> = (0..d).map(|a| if mask >> a & 1 == 1 { b.hi()[a] } else { b.lo()[a] }).collect();
            out.push(self.apply(&p)?);
        }
        out.push(self.apply(&b.center())?);
        Ok(out)
    }
}

fn hull(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = points[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for a in 0..d {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

fn diameter(points: &[Vec<f64>]) -> f64 {
    let (lo, hi) = hull(points);
    lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
}

fn locate(targets: &[IntervalBox<f64>], p: &[f64]) -> Option<usize> {
    targets.iter().position(|t| t.contains(p))
}

/// Where a small image piece with hull `[lo, hi]` belongs: `Some(Some(i))` inside the
/// closure of target `i`, `Some(None)` clear of every target, `None` when it straddles.
fn place(targets: &[IntervalBox<f64>], lo: &[f64], hi: &[f64]) -> Option<Option<usize>> {
    if lo == hi {
        return Some(locate(targets, lo));
    }
    if let Some(i) = targets.iter().position(|t| t.contains_closed(lo, 0.0) && t.contains_closed(hi, 0.0)) {
        return Some(Some(i));
    }
    let touches = |t: &IntervalBox<f64>| (0..lo.len()).all(|a| lo[a] <= t.hi()[a] && hi[a] >= t.lo()[a]);
    let clear = targets.iter().filter(|t| !t.is_degenerate()).all(|t| !touches(t));
    clear.then_some(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushforwardOptions {
    /// Pieces are subdivided until their image is smaller than the smallest target side over this.
    pub resolution: f64,
    /// Straddling pieces lighter than this fraction of their source box are assigned by their centre.
    pub leaf_tolerance: f64,
    pub max_depth: usize,
}

impl Default for PushforwardOptions {
    fn default() -> Self {
        Self { resolution: 8.0, leaf_tolerance: 1e-9, max_depth: 48 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pushforward {
    pub measure: DiscreteMeasure,
    /// Mass whose image falls outside every target box.
    pub outside: f64,
}

struct PushCtx<'a> {
    f: &'a MeasurableMap,
    targets: &'a [IntervalBox<f64>],
    threshold: f64,
    tol: f64,
    max_depth: usize,
}

impl PushCtx<'_> {
    fn run(&self, b: &IntervalBox<f64>, mass: f64, depth: usize, acc: &mut [f64]) -> Result<(), MeasureError> {
        let outside = acc.len() - 1;
        let images = self.f.sample(b)?;
        if diameter(&images) < self.threshold {
            let (lo, hi) = hull(&images);
            if let Some(slot) = place(self.targets, &lo, &hi) {
                acc[slot.unwrap_or(outside)] += mass;
                return Ok(());
            }
        }
        if mass <= self.tol {
            acc[locate(self.targets, &images[images.len() - 1]).unwrap_or(outside)] += mass;
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(MeasureError::UnresolvedBoundary { mass, depth });
        }
        let children = b.bisect_all();
        let share = mass / children.len() as f64;
        for c in &children {
            self.run(c, share, depth + 1, acc)?;
        }
        Ok(())
    }
}

/// `μ_B(Δ_B) = μ_A(f⁻¹Δ_B)` for every target box, conserving total mass.
pub fn pushforward(
    mu: &DiscreteMeasure,
    f: &MeasurableMap,
    targets: &[IntervalBox<f64>],
    opts: &PushforwardOptions,
) -> Result<Pushforward, MeasureError> {
    if mu.dim() != f.dim_in() {
        return Err(MeasureError::InvalidMeasure(format!("{}-dimensional measure through {}", mu.dim(), f.name())));
    }
    let skeleton = DiscreteMeasure::with_dim(f.dim_out(), targets.iter().map(|t| (t.clone(), 0.0)).collect())?;
    let min_side = skeleton.boxes().filter(|t| !t.is_degenerate()).map(|t| t.min_side()).fold(f64::INFINITY, f64::min);
    if !min_side.is_finite() {
        return Err(MeasureError::InvalidMeasure("pushforward needs at least one target box of positive volume".into()));
    }
    let per_box = mu
        .support()
        .par_iter()
        .map(|(b, m)| {
            let mut acc = vec![0.0; targets.len() + 1];
            if *m == 0.0 {
                return Ok(acc);
            }
            if b.is_degenerate() {
                let y = f.apply(b.lo())?;
                acc[locate(targets, &y).unwrap_or(targets.len())] += m;
                return Ok(acc);
            }
            let ctx = PushCtx {
                f,
                targets,
                threshold: min_side / opts.resolution,
                tol: opts.leaf_tolerance * m,
                max_depth: opts.max_depth,
            };
            ctx.run(b, *m, 0, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<Vec<_>, MeasureError>>()?;
    let mut total = vec![0.0; targets.len() + 1];
    for acc in &per_box {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
    }
    let outside = total.pop().unwrap_or(0.0);
    let measure = DiscreteMeasure::with_dim(f.dim_out(), targets.iter().cloned().zip(total).collect())?;
    Ok(Pushforward { measure, outside })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackOptions {
    /// Error on discontinuities instead of flagging the box.
    pub strict: bool,
    /// Cells per axis each source box is split into before the discontinuity search.
    pub base_cells: usize,
    /// Bisection levels followed into the worst child of each cell.
    pub chain_depth: usize,
    /// A level counts as stalled when the worst child keeps more than this share of the image diameter.
    pub shrink_ratio: f64,
    /// Consecutive stalled levels that identify a discontinuity.
    pub stalled_levels: usize,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        Self { strict: true, base_cells: 64, chain_depth: 30, shrink_ratio: 0.75, stalled_levels: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pullback {
    pub measure: DiscreteMeasure,
    /// Indices of source boxes containing a discontinuity of the map.
    pub invalid: Vec<usize>,
    /// Tiny boxes isolating each discontinuity found.
    pub discontinuities: Vec<IntervalBox<f64>>,
}

struct Chain {
    flagged: bool,
    /// Pieces known to be free of the tracked discontinuity.
    siblings: Vec<IntervalBox<f64>>,
    leaf: IntervalBox<f64>,
}

fn follow_chain(f: &MeasurableMap, cell: &IntervalBox<f64>, opts: &PullbackOptions) -> Result<Chain, MeasureError> {
    let mut cur = cell.clone();
    let mut diam = diameter(&f.sample(&cur)?);
    let mut stalled = 0usize;
    let mut siblings = Vec::new();
    for _ in 0..opts.chain_depth {
        if diam == 0.0 {
            break;
        }
        let mut children = cur.bisect_all();
        let diams = children.iter().map(|c| f.sample(c).map(|s| diameter(&s))).collect::<Result<Vec<_>, _>>()?;
        let worst = (0..children.len()).max_by(|&a, &b| diams[a].total_cmp(&diams[b])).unwrap_or(0);
        stalled = if diams[worst] > opts.shrink_ratio * diam { stalled + 1 } else { 0 };
        cur = children.swap_remove(worst);
        siblings.extend(children);
        diam = diams[worst];
    }
    Ok(Chain { flagged: stalled >= opts.stalled_levels, siblings, leaf: cur })
}

fn merged_mass(target: &dyn BoxMeasure, mut pieces: Vec<(f64, f64)>) -> Result<f64, MeasureError> {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in pieces {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged.iter().map(|&(a, b)| target.mass(&IntervalBox::interval(a, b)?)).sum()
}

/// `μ_A(Δ_A) = μ_B(f(Δ_A))` for every source box. Boxes containing a discontinuity
/// of `f` are an error when `strict`; otherwise they are listed as invalid and, in one
/// dimension, carry the mass of the image set (whose points are excluded from the gap).
pub fn pullback(
    target: &dyn BoxMeasure,
    f: &MeasurableMap,
    boxes: &[IntervalBox<f64>],
    opts: &PullbackOptions,
) -> Result<Pullback, MeasureError> {
    if !f.admits_pullback() {
        return Err(MeasureError::Unsupported(format!("{} does not admit pullback", f.name())));
    }
    if target.dim() != f.dim_out() {
        return Err(MeasureError::InvalidMeasure(format!("{}-dimensional target for {}", target.dim(), f.name())));
    }
    let dim = f.dim_in();
    DiscreteMeasure::with_dim(dim, boxes.iter().map(|b| (b.clone(), 0.0)).collect())?;
    let cells_per_axis = if dim == 1 { opts.base_cells.max(1) } else { opts.base_cells.clamp(1, 8) };
    let rows = boxes
        .par_iter()
        .map(|b| -> Result<(f64, Vec<IntervalBox<f64>>), MeasureError> {
            if b.is_degenerate() {
                let y = f.apply(b.lo())?;
                return Ok((target.mass(&IntervalBox::new(y.clone(), y)?)?, Vec::new()));
            }
            let cells = b.partition(cells_per_axis);
            let mut leaves = Vec::new();
            let mut pieces = Vec::new();
            let mut images = Vec::new();
            for c in &cells {
                let chain = follow_chain(f, c, opts)?;
                let sample = f.sample(c)?;
                if chain.flagged {
                    if opts.strict {
                        return Err(MeasureError::DiscontinuityDetected {
                            lo: chain.leaf.lo().to_vec(),
                            hi: chain.leaf.hi().to_vec(),
                            levels: opts.stalled_levels,
                        });
                    }
                    if dim == 1 {
                        for s in &chain.siblings {
                            let (lo, hi) = hull(&f.sample(s)?);
                            pieces.push((lo[0], hi[0]));
                        }
                    }
                    leaves.push(chain.leaf);
                } else {
                    let (lo, hi) = hull(&sample);
                    pieces.push((lo[0], hi[0]));
                }
                images.extend(sample);
            }
            if dim == 1 {
                return Ok((merged_mass(target, pieces)?, leaves));
            }
            if !leaves.is_empty() {
                return Ok((0.0, leaves));
            }
            let (lo, hi) = hull(&images);
            Ok((target.mass(&IntervalBox::new(lo, hi)?)?, leaves))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut invalid = Vec::new();
    let mut discontinuities = Vec::new();
    let mut support = Vec::with_capacity(boxes.len());
    for (i, (b, (mass, leaves))) in boxes.iter().zip(rows).enumerate() {
        if !leaves.is_empty() {
            invalid.push(i);
            discontinuities.extend(leaves);
        }
        support.push((b.clone(), mass));
    }
    Ok(Pullback { measure: DiscreteMeasure::with_dim(dim, support)?, invalid, discontinuities })
}

use super::{
    apply_transform, estimate_asymptotic_velocity, CausalTransform, GeometryError, IntervalBox, Mat3,
    SampledTrajectory, SpaceTimePoint, Vec3,
};
use crate::scalar::Real;

/// Sampling of the rays `vᶜ` used to estimate `f⁺(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayConfig {
    pub t0: f64,
    pub t_final: f64,
}

impl Default for RayConfig {
    fn default() -> Self {
        Self { t0: 1.0, t_final: 1e6 }
    }
}

/// Estimates `f⁺(v) = ω(f(vᶜ))` from the transformed ray.
///
/// When `f` carries an analytic `f⁺`, the estimate must agree with it within `tol`.
pub fn estimate_asymptotic_transform<T: Real>(
    f: &CausalTransform<T>,
    v: Vec3<T>,
    tol: T,
    rays: RayConfig,
) -> Result<Vec3<T>, GeometryError> {
    let ray = SampledTrajectory::ray(v, T::lit(rays.t0), T::lit(rays.t_final))?;
    let image = apply_transform(f, &ray)?;
    let est = match estimate_asymptotic_velocity(&image, tol) {
        Ok(e) if e.converged => e,
        Ok(e) => {
            return Err(GeometryError::NotRegular(format!(
                "{}: estimates at v = {:?} still moving (last window value {:?})",
                f.name(),
                v,
                e.value
            )))
        }
        Err(GeometryError::NotConverged(msg)) => {
            return Err(GeometryError::NotRegular(format!("{} at v = {:?}: {msg}", f.name(), v)))
        }
        Err(e) => return Err(e),
    };
    if let Some(exact) = f.analytic_plus(v) {
        let gap = (exact - est.value).norm();
        if gap > tol {
            return Err(GeometryError::AnalyticMismatch(format!(
                "{}: estimated {:?} vs analytic {:?} (gap {gap})",
                f.name(),
                est.value,
                exact
            )));
        }
    }
    Ok(est.value)
}

/// The 13 unit probes `{0, ±eᵢ, (eᵢ ± eⱼ)/√2 for i < j}`.
pub fn default_probes<T: Real>() -> Vec<Vec3<T>> {
    let mut out = vec![Vec3::zero()];
    for i in 0..3 {
        out.push(Vec3::unit(i));
        out.push(-Vec3::unit(i));
    }
    let s = T::one() / T::lit(2.0).sqrt();
    for i in 0..3 {
        for j in (i + 1)..3 {
            out.push((Vec3::unit(i) + Vec3::unit(j)) * s);
            out.push((Vec3::unit(i) - Vec3::unit(j)) * s);
        }
    }
    out
}

/// Where classification reads `f⁺` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlusSource {
    /// Use the analytic `f⁺` when the transform carries one, else estimate.
    PreferAnalytic,
    /// Always estimate from transformed rays.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TransformClass<T> {
    AsymptoticallyIdentical,
    AsymptoticallyEuclidean { rotation: Mat3<T>, v0: Vec3<T> },
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification<T> {
    pub class: TransformClass<T>,
    /// Fitted affine map `v ↦ A v − v0`.
    pub linear: Mat3<T>,
    pub v0: Vec3<T>,
    /// `max |AᵀA − I|`.
    pub orthogonality_error: T,
    /// Largest residual of the affine fit over the probes.
    pub fit_residual: T,
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let m = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= m * a[col][k];
                }
                b[row] -= m * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2], b[3] / a[3][3]])
}

/// Fits `f⁺(v) ≈ A v + b` by least squares over `(v, f⁺(v))` pairs.
pub fn fit_affine<T: Real>(pairs: &[(Vec3<T>, Vec3<T>)]) -> Option<(Mat3<T>, Vec3<T>)> {
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [[0.0; 4]; 3];
    for (v, w) in pairs {
        let row = [v.x.as_f64(), v.y.as_f64(), v.z.as_f64(), 1.0];
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
            for c in 0..3 {
                atb[c][i] += row[i] * w[c].as_f64();
            }
        }
    }
    let mut lin = Mat3::identity();
    let mut off = Vec3::zero();
    for c in 0..3 {
        let sol = solve4(ata, atb[c])?;
        for j in 0..3 {
            lin.rows[c][j] = T::lit(sol[j]);
        }
        off[c] = T::lit(sol[3]);
    }
    Some((lin, off))
}

/// Classifies `f` by fitting `f⁺(v) = R v − v0` on the probe set.
pub fn classify_transform<T: Real>(
    f: &CausalTransform<T>,
    probes: &[Vec3<T>],
    tol: T,
    source: PlusSource,
    rays: RayConfig,
) -> Result<Classification<T>, GeometryError> {
    if probes.len() < 13 {
        return Err(GeometryError::InvalidProbes(format!("need at least 13 probes, got {}", probes.len())));
    }
    let pairs = probes
        .iter()
        .map(|&v| {
            let w = match (source, f.analytic_plus(v)) {
                (PlusSource::PreferAnalytic, Some(w)) => w,
                _ => estimate_asymptotic_transform(&f.clone().without_analytic_plus(), v, tol, rays)?,
            };
            Ok((v, w))
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    let (lin, off) = fit_affine(&pairs)
        .ok_or_else(|| GeometryError::InvalidProbes("probes are not in general position".into()))?;
    let fit_residual = pairs
        .iter()
        .map(|&(v, w)| (lin.apply(v) + off - w).norm())
        .fold(T::zero(), T::max);
    let orthogonality_error = lin.transpose().mul(&lin).max_abs_diff(&Mat3::identity());
    let v0 = -off;
    let class = if orthogonality_error < tol && fit_residual < tol {
        if lin.max_abs_diff(&Mat3::identity()) < tol && v0.norm_max() < tol {
            TransformClass::AsymptoticallyIdentical
        } else {
            TransformClass::AsymptoticallyEuclidean { rotation: lin, v0 }
        }
    } else {
        TransformClass::Other
    };
    Ok(Classification { class, linear: lin, v0, orthogonality_error, fit_residual })
}

/// `h(t, x) = (1/t, x/t)`, mapping the future half of space-time into `F⁺`.
pub fn compactify<T: Real>(p: SpaceTimePoint<T>) -> Result<(T, Vec3<T>), GeometryError> {
    if !(p.t > T::zero()) {
        return Err(GeometryError::NonPositiveTime(p.t.as_f64()));
    }
    Ok((T::one() / p.t, p.x / p.t))
}

/// `h⁻¹(s, w) = (1/s, w/s)` for `s > 0`.
pub fn decompactify<T: Real>(s: T, w: Vec3<T>) -> Result<SpaceTimePoint<T>, GeometryError> {
    if !(s > T::zero()) {
        return Err(GeometryError::NonPositiveTime(s.as_f64()));
    }
    Ok(SpaceTimePoint { t: T::one() / s, x: w / s })
}

/// `f̂(s, w) = h(f(h⁻¹(s, w)))`; tends to `(0, f⁺(w))` as `s → 0` for regular `f`.
pub fn compactified_transform<T: Real>(f: &CausalTransform<T>, s: T, w: Vec3<T>) -> Result<(T, Vec3<T>), GeometryError> {
    let p = decompactify(s, w)?;
    let (t, x) = f.apply_point(p.t, p.x);
    compactify(SpaceTimePoint { t, x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport<T> {
    pub times: Vec<T>,
    /// All images of `Iᶜ` lie in `I₊εᶜ(t)`.
    pub contained: Vec<bool>,
    /// Every probed point of `I₋εᶜ(t)` has a preimage in `Iᶜ`.
    pub covering: Vec<bool>,
    pub holds: Vec<bool>,
    /// First tested time from which the sandwich holds at every later tested time.
    pub t0: Option<T>,
}

fn pad3<T: Real>(v: &[T]) -> Vec3<T> {
    let mut out = Vec3::zero();
    for (i, &c) in v.iter().take(3).enumerate() {
        out[i] = c;
    }
    out
}

/// Checks `I₋εᶜ(t) ⊆ f(Iᶜ)(t) ⊆ I₊εᶜ(t)` on a sample grid at each tested time.
///
/// Boxes of dimension below three are embedded in the leading coordinates.
/// Membership is tested on closures with a relative slack of `1e-9`.
pub fn cone_sandwich_check<T: Real>(
    f: &CausalTransform<T>,
    box_i: &IntervalBox<T>,
    eps: T,
    times: &[T],
    per_axis: usize,
) -> Result<SandwichReport<T>, GeometryError> {
    if box_i.dim() > 3 {
        return Err(GeometryError::InvalidBox("cone sandwich supports boxes of dimension ≤ 3".into()));
    }
    let inner = box_i.shrink(eps)?;
    let outer = box_i.grow(eps);
    let k = box_i.dim();
    let outer_pts = box_i.grid_points(per_axis);
    let inner_pts = inner.grid_points(per_axis);
    let slack = T::lit(1e-9);
    let mut contained = Vec::with_capacity(times.len());
    let mut covering = Vec::with_capacity(times.len());
    for &t in times {
        let t_src = f.time_preimage(t, t)?;
        let c_ok = outer_pts.iter().all(|v| {
            let y = f.space(t_src, pad3(v) * t_src) / t;
            let y: Vec<T> = (0..k).map(|i| y[i]).collect();
            outer.contains_closed(&y, slack * (T::one() + outer.min_side()))
        });
        let mut cov_ok = true;
        for w in &inner_pts {
            let x = f.space_preimage(t_src, pad3(w) * t)?;
            let v = x / t_src;
            let v: Vec<T> = (0..k).map(|i| v[i]).collect();
            if !box_i.contains_closed(&v, slack * (T::one() + box_i.min_side())) {
                cov_ok = false;
                break;
            }
        }
        contained.push(c_ok);
        covering.push(cov_ok);
    }
    let holds: Vec<bool> = contained.iter().zip(&covering).map(|(&a, &b)| a && b).collect();
    let t0 = (0..holds.len()).find(|&i| holds[i..].iter().all(|&h| h)).map(|i| times[i]);
    Ok(SandwichReport { times: times.to_vec(), contained, covering, holds, t0 })
}

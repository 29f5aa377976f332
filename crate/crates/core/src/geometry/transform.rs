use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Mat3, SampledTrajectory, Vec3};
use crate::scalar::Real;

type TimeMap<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type SpaceMap<T> = Arc<dyn Fn(T, Vec3<T>) -> Vec3<T> + Send + Sync>;
type VelocityMap<T> = Arc<dyn Fn(Vec3<T>) -> Vec3<T> + Send + Sync>;

/// A causal transformation `f(t, x) = (f_T(t), f_X(t, x))` of space-time.
///
/// Optional pieces: the analytic asymptotic transform `f⁺`, the inverse of `f_T`,
/// and the inverse of `f_X(t, ·)` at fixed source time `t`. Missing inverses are
/// computed numerically where needed.
#[derive(Clone)]
pub struct CausalTransform<T> {
    name: String,
    time_map: TimeMap<T>,
    space_map: SpaceMap<T>,
    analytic_plus: Option<VelocityMap<T>>,
    time_inverse: Option<TimeMap<T>>,
    space_inverse: Option<SpaceMap<T>>,
}

impl<T> fmt::Debug for CausalTransform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CausalTransform")
            .field("name", &self.name)
            .field("analytic_plus", &self.analytic_plus.is_some())
            .finish()
    }
}

impl<T: Real> CausalTransform<T> {
    pub fn new(
        name: impl Into<String>,
        time_map: impl Fn(T) -> T + Send + Sync + 'static,
        space_map: impl Fn(T, Vec3<T>) -> Vec3<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            time_map: Arc::new(time_map),
            space_map: Arc::new(space_map),
            analytic_plus: None,
            time_inverse: None,
            space_inverse: None,
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |t| t, |_, x| x)
            .with_analytic_plus(|v| v)
            .with_time_inverse(|t| t)
            .with_space_inverse(|_, y| y)
    }

    pub fn with_analytic_plus(mut self, plus: impl Fn(Vec3<T>) -> Vec3<T> + Send + Sync + 'static) -> Self {
        self.analytic_plus = Some(Arc::new(plus));
        self
    }

    pub fn with_time_inverse(mut self, inv: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.time_inverse = Some(Arc::new(inv));
        self
    }

    pub fn with_space_inverse(mut self, inv: impl Fn(T, Vec3<T>) -> Vec3<T> + Send + Sync + 'static) -> Self {
        self.space_inverse = Some(Arc::new(inv));
        self
    }

    /// Drops the analytic asymptotic map, forcing estimators to work from samples.
    pub fn without_analytic_plus(mut self) -> Self {
        self.analytic_plus = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn time(&self, t: T) -> T {
        (self.time_map)(t)
    }

    pub fn space(&self, t: T, x: Vec3<T>) -> Vec3<T> {
        (self.space_map)(t, x)
    }

    pub fn apply_point(&self, t: T, x: Vec3<T>) -> (T, Vec3<T>) {
        (self.time(t), self.space(t, x))
    }

    pub fn analytic_plus(&self, v: Vec3<T>) -> Option<Vec3<T>> {
        self.analytic_plus.as_ref().map(|p| p(v))
    }

    pub fn has_analytic_plus(&self) -> bool {
        self.analytic_plus.is_some()
    }

    /// Source time `t′` with `f_T(t′) = t`, bracketing from `hint`.
    pub fn time_preimage(&self, t: T, hint: T) -> Result<T, GeometryError> {
        if let Some(inv) = &self.time_inverse {
            return Ok(inv(t));
        }
        let mut lo = hint;
        let mut hi = hint;
        let mut step = hint.abs().max(T::one());
        let two = T::lit(2.0);
        let mut guard = 0;
        while self.time(lo) > t {
            lo = lo - step;
            step = step * two;
            guard += 1;
            if guard > 200 {
                return Err(GeometryError::NonCausal(format!("no time preimage below {t}")));
            }
        }
        step = hint.abs().max(T::one());
        while self.time(hi) < t {
            hi = hi + step;
            step = step * two;
            guard += 1;
            if guard > 400 {
                return Err(GeometryError::NonCausal(format!("no time preimage above {t}")));
            }
        }
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.time(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / two)
    }

    /// Solves `f_X(t, x) = y` for `x`, using the analytic inverse when present and
    /// damped Newton iteration with a finite-difference Jacobian otherwise.
    pub fn space_preimage(&self, t: T, y: Vec3<T>) -> Result<Vec3<T>, GeometryError> {
        if let Some(inv) = &self.space_inverse {
            return Ok(inv(t, y));
        }
        let mut x = y;
        let scale = T::one() + y.norm();
        for _ in 0..100 {
            let r = self.space(t, x) - y;
            if r.norm() <= T::lit(1e-12) * scale {
                return Ok(x);
            }
            let h = T::lit(1e-7) * (T::one() + x.norm());
            let mut jac = Mat3::identity();
            for j in 0..3 {
                let mut xp = x;
                xp[j] = xp[j] + h;
                let mut xm = x;
                xm[j] = xm[j] - h;
                let col = (self.space(t, xp) - self.space(t, xm)) / (h * T::lit(2.0));
                for i in 0..3 {
                    jac.rows[i][j] = col[i];
                }
            }
            let inv = jac
                .inverse()
                .ok_or_else(|| GeometryError::NonCausal(format!("singular spatial map at t = {t}")))?;
            x -= inv.apply(r);
        }
        let r = self.space(t, x) - y;
        if r.norm() <= T::lit(1e-8) * scale {
            Ok(x)
        } else {
            Err(GeometryError::NonCausal(format!("spatial map not invertible near {:?} at t = {t}", y)))
        }
    }

    /// The composition `g ∘ self` (apply `self` first).
    pub fn then(&self, g: &CausalTransform<T>) -> CausalTransform<T> {
        let (f1, g1) = (self.clone(), g.clone());
        let (f2, g2) = (self.clone(), g.clone());
        let mut out = CausalTransform::new(
            format!("{}∘{}", g.name, self.name),
            move |t| g1.time(f1.time(t)),
            move |t, x| g2.space(f2.time(t), f2.space(t, x)),
        );
        if let (Some(fp), Some(gp)) = (self.analytic_plus.clone(), g.analytic_plus.clone()) {
            out = out.with_analytic_plus(move |v| gp(fp(v)));
        }
        if let (Some(fi), Some(gi)) = (self.time_inverse.clone(), g.time_inverse.clone()) {
            out = out.with_time_inverse(move |t| fi(gi(t)));
        }
        if let (Some(fi), Some(gi)) = (self.space_inverse.clone(), g.space_inverse.clone()) {
            let f3 = self.clone();
            out = out.with_space_inverse(move |t, y| fi(t, gi(f3.time(t), y)));
        }
        out
    }
}

/// Applies `f` sample by sample: `{(f_T(t), f_X(t, γ(t)))}`.
pub fn apply_transform<T: Real>(
    f: &CausalTransform<T>,
    traj: &SampledTrajectory<T>,
) -> Result<SampledTrajectory<T>, GeometryError> {
    let mapped: Vec<(T, Vec3<T>)> = traj.samples().iter().map(|&(t, x)| f.apply_point(t, x)).collect();
    if let Some(k) = mapped.windows(2).position(|w| !(w[1].0 > w[0].0)) {
        return Err(GeometryError::NonCausal(format!(
            "{}: time map not increasing between t = {} and t = {}",
            f.name(),
            traj.samples()[k].0,
            traj.samples()[k + 1].0
        )));
    }
    SampledTrajectory::new(mapped)
}

/// Named parametric transforms selectable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    /// `(t + t_shift, R x − v0 t + x0)`, `R` the rotation by `angle` about `axis`.
    Galilean {
        #[serde(default = "default_axis")]
        axis: [f64; 3],
        #[serde(default)]
        angle: f64,
        #[serde(default)]
        v0: [f64; 3],
        #[serde(default)]
        x0: [f64; 3],
        #[serde(default)]
        t_shift: f64,
    },
    /// `(a t, a x)` with `a > 0`.
    Scale { a: f64 },
    /// `(t, x + c·ln(1 + t)·ê)`.
    LogDrift {
        c: f64,
        #[serde(default = "default_drift_axis")]
        axis: [f64; 3],
    },
    /// `(t, S x / t^q)` with the shear `S x = x + k·x_y·ê_x`.
    ShearOverT { k: f64, q: f64 },
    /// `(t, R(θ(t)) x)` with `θ(t) = theta_inf·t/(t + tau)` about `axis`.
    Swirl {
        theta_inf: f64,
        tau: f64,
        #[serde(default = "default_axis")]
        axis: [f64; 3],
    },
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_drift_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn shear<T: Real>(k: T, x: Vec3<T>) -> Vec3<T> {
    Vec3::new(x.x + k * x.y, x.y, x.z)
}

impl TransformSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            TransformSpec::Galilean { axis, angle, v0, x0, t_shift } => {
                finite(axis) && finite(v0) && finite(x0) && angle.is_finite() && t_shift.is_finite()
            }
            TransformSpec::Scale { a } => a.is_finite() && *a > 0.0,
            TransformSpec::LogDrift { c, axis } => c.is_finite() && finite(axis),
            TransformSpec::ShearOverT { k, q } => k.is_finite() && q.is_finite(),
            TransformSpec::Swirl { theta_inf, tau, axis } => theta_inf.is_finite() && *tau > 0.0 && finite(axis),
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidTransform(format!("{self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TransformSpec::Galilean { .. } => "galilean",
            TransformSpec::Scale { .. } => "scale",
            TransformSpec::LogDrift { .. } => "log_drift",
            TransformSpec::ShearOverT { .. } => "shear_over_t",
            TransformSpec::Swirl { .. } => "swirl",
        }
    }

    /// The catalog entry describing `f⁻¹`.
    pub fn inverse(&self) -> TransformSpec {
        match *self {
            TransformSpec::Galilean { axis, angle, v0, x0, t_shift } => {
                let r_inv = Mat3::rotation(Vec3::from_array(axis), -angle);
                let v = Vec3::from_array(v0);
                let x = Vec3::from_array(x0);
                TransformSpec::Galilean {
                    axis,
                    angle: -angle,
                    v0: (-r_inv.apply(v)).to_array(),
                    x0: (-r_inv.apply(x + v * t_shift)).to_array(),
                    t_shift: -t_shift,
                }
            }
            TransformSpec::Scale { a } => TransformSpec::Scale { a: 1.0 / a },
            TransformSpec::LogDrift { c, axis } => TransformSpec::LogDrift { c: -c, axis },
            TransformSpec::ShearOverT { k, q } => TransformSpec::ShearOverT { k: -k, q: -q },
            TransformSpec::Swirl { theta_inf, tau, axis } => TransformSpec::Swirl { theta_inf: -theta_inf, tau, axis },
        }
    }

    /// Builds the transform, attaching analytic `f⁺` where the entry is asymptotically regular.
    pub fn build<T: Real>(&self) -> CausalTransform<T> {
        let c = |x: f64| T::lit(x);
        let v3 = |a: [f64; 3]| Vec3::new(c(a[0]), c(a[1]), c(a[2]));
        match *self {
            TransformSpec::Galilean { axis, angle, v0, x0, t_shift } => {
                let r = Mat3::rotation(v3(axis), c(angle));
                let rt = r.transpose();
                let (v0, x0, ts) = (v3(v0), v3(x0), c(t_shift));
                CausalTransform::new("galilean", move |t| t + ts, move |t, x| r.apply(x) - v0 * t + x0)
                    .with_analytic_plus(move |v| r.apply(v) - v0)
                    .with_time_inverse(move |t| t - ts)
                    .with_space_inverse(move |t, y| rt.apply(y + v0 * t - x0))
            }
            TransformSpec::Scale { a } => {
                let a = c(a);
                CausalTransform::new("scale", move |t| a * t, move |_, x| x * a)
                    .with_analytic_plus(|v| v)
                    .with_time_inverse(move |t| t / a)
                    .with_space_inverse(move |_, y| y / a)
            }
            TransformSpec::LogDrift { c: k, axis } => {
                let k = c(k);
                let e = v3(axis);
                let e = if e.norm() > T::zero() { e / e.norm() } else { Vec3::unit(0) };
                CausalTransform::new("log_drift", |t| t, move |t, x| x + e * (k * (T::one() + t).ln()))
                    .with_analytic_plus(|v| v)
                    .with_time_inverse(|t| t)
                    .with_space_inverse(move |t, y| y - e * (k * (T::one() + t).ln()))
            }
            TransformSpec::ShearOverT { k, q } => {
                let (kk, qq) = (c(k), c(q));
                let mut f = CausalTransform::new("shear_over_t", |t| t, move |t: T, x| shear(kk, x) / t.powf(qq))
                    .with_time_inverse(|t| t)
                    .with_space_inverse(move |t: T, y| shear(-kk, y) * t.powf(qq));
                if q == 0.0 {
                    f = f.with_analytic_plus(move |v| shear(kk, v));
                } else if q > 0.0 {
                    f = f.with_analytic_plus(|_| Vec3::zero());
                }
                f
            }
            TransformSpec::Swirl { theta_inf, tau, axis } => {
                let (th, ta, ax) = (c(theta_inf), c(tau), v3(axis));
                let r_inf = Mat3::rotation(ax, th);
                CausalTransform::new(
                    "swirl",
                    |t| t,
                    move |t: T, x| Mat3::rotation(ax, th * t / (t + ta)).apply(x),
                )
                .with_analytic_plus(move |v| r_inf.apply(v))
                .with_time_inverse(|t| t)
                .with_space_inverse(move |t: T, y| Mat3::rotation(ax, -th * t / (t + ta)).apply(y))
            }
        }
    }

    /// Analytic `(R, v0)` for entries whose `f⁺` is Euclidean.
    pub fn euclidean_parts(&self) -> Option<(Mat3<f64>, Vec3<f64>)> {
        match *self {
            TransformSpec::Galilean { axis, angle, v0, .. } => {
                Some((Mat3::rotation(Vec3::from_array(axis), angle), Vec3::from_array(v0)))
            }
            TransformSpec::Scale { .. } | TransformSpec::LogDrift { .. } => Some((Mat3::identity(), Vec3::zero())),
            TransformSpec::Swirl { theta_inf, axis, .. } => {
                Some((Mat3::rotation(Vec3::from_array(axis), theta_inf), Vec3::zero()))
            }
            TransformSpec::ShearOverT { k, q } if q == 0.0 && k == 0.0 => Some((Mat3::identity(), Vec3::zero())),
            TransformSpec::ShearOverT { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_points() -> Vec<(f64, Vec3<f64>)> {
        vec![(1.5, Vec3::new(0.3, -2.0, 1.0)), (7.0, Vec3::new(-4.0, 0.5, 2.5)), (40.0, Vec3::new(10.0, 3.0, -8.0))]
    }

    #[test]
    fn catalog_inverses_undo_forward_maps() {
        let specs = [
            TransformSpec::Galilean { axis: [1.0, 1.0, 0.0], angle: 0.4, v0: [0.5, -1.0, 2.0], x0: [1.0, 2.0, 3.0], t_shift: 0.7 },
            TransformSpec::Scale { a: 2.5 },
            TransformSpec::LogDrift { c: 0.5, axis: [0.0, 1.0, 0.0] },
            TransformSpec::ShearOverT { k: 0.3, q: 1.0 },
            TransformSpec::Swirl { theta_inf: 1.1, tau: 3.0, axis: [0.0, 0.0, 1.0] },
        ];
        for spec in specs {
            let f = spec.build::<f64>();
            let g = spec.inverse().build::<f64>();
            for (t, x) in sample_points() {
                let (t1, x1) = f.apply_point(t, x);
                let (t2, x2) = g.apply_point(t1, x1);
                assert!((t2 - t).abs() < 1e-12, "{spec:?}");
                assert!((x2 - x).norm() < 1e-10, "{spec:?}: {x2:?} vs {x:?}");
                let back = f.space_preimage(t, x1).unwrap();
                assert!((back - x).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn numeric_preimages_match_analytic() {
        let spec = TransformSpec::Swirl { theta_inf: 0.8, tau: 2.0, axis: [1.0, 0.0, 1.0] };
        let f = spec.build::<f64>();
        let bare = CausalTransform::new("bare", |t| t * t, {
            let f = f.clone();
            move |t, x| f.space(t, x)
        });
        let (t, x) = (3.0, Vec3::new(1.0, -2.0, 0.5));
        let y = f.space(t, x);
        assert!((bare.space_preimage(t, y).unwrap() - x).norm() < 1e-9);
        assert!((bare.time_preimage(16.0, 1.0).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn non_monotone_time_map_is_rejected() {
        let f = CausalTransform::new("fold", |t: f64| -t, |_, x| x);
        let tr = SampledTrajectory::ray(Vec3::unit(0), 1.0, 10.0).unwrap();
        assert!(matches!(apply_transform(&f, &tr), Err(GeometryError::NonCausal(_))));
    }

    #[test]
    fn composition_matches_sequential_application() {
        let f = TransformSpec::LogDrift { c: 0.2, axis: [1.0, 0.0, 0.0] }.build::<f64>();
        let g = TransformSpec::Scale { a: 3.0 }.build::<f64>();
        let h = f.then(&g);
        for (t, x) in sample_points() {
            let (t1, x1) = f.apply_point(t, x);
            let (t2, x2) = g.apply_point(t1, x1);
            let (t3, x3) = h.apply_point(t, x);
            assert_eq!(t2, t3);
            assert!((x2 - x3).norm() < 1e-12);
            assert!((h.space_preimage(t, x3).unwrap() - x).norm() < 1e-12);
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec: TransformSpec = serde_json::from_str(r#"{"kind":"log_drift","c":0.5}"#).unwrap();
        assert_eq!(spec, TransformSpec::LogDrift { c: 0.5, axis: [1.0, 0.0, 0.0] });
        assert!(serde_json::from_str::<TransformSpec>(r#"{"kind":"scale","a":1,"b":2}"#).is_err());
        assert!(TransformSpec::Scale { a: -1.0 }.validate().is_err());
    }
}

//! Limit estimation for sequences sampled at increasing times.
//!
//! The model is `y(t) = L + c·t^(−p)` with a shared exponent across components.
//! For fixed `p` the model is linear in `(L, c)`; the exponent is scanned on a grid
//! and then refined by golden-section search on the residual sum of squares.

/// Result of fitting `y(t) = L + c·t^(−p)` to one or more component series.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub limit: Vec<f64>,
    pub coef: Vec<f64>,
    pub exponent: f64,
    /// Residual sum of squares divided by the total sum of squares about the mean.
    pub rel_ssr: f64,
}

const P_MIN: f64 = 0.1;
const P_MAX: f64 = 3.0;

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr = xs.iter().zip(ys).map(|(&x, &y)| (y - intercept - slope * x).powi(2)).sum();
    (intercept, slope, ssr)
}

fn ssr_at(ts: &[f64], series: &[Vec<f64>], p: f64) -> (f64, Vec<(f64, f64)>) {
    // Scale times by the first sample so that t^(−p) stays O(1).
    let t_ref = ts[0];
    let xs: Vec<f64> = ts.iter().map(|&t| (t / t_ref).powf(-p)).collect();
    let mut total = 0.0;
    let mut params = Vec::with_capacity(series.len());
    for ys in series {
        let (l, c, s) = linear_fit(&xs, ys);
        total += s;
        params.push((l, c * t_ref.powf(p)));
    }
    (total, params)
}

/// Fits the tail model to `series` (one vector per component) sampled at `ts`.
///
/// Returns `None` for fewer than three samples or non-positive times.
pub fn fit_power_tail(ts: &[f64], series: &[Vec<f64>]) -> Option<TailFit> {
    if ts.len() < 3 || ts.iter().any(|&t| !(t > 0.0)) || series.iter().any(|s| s.len() != ts.len()) {
        return None;
    }
    let sst: f64 = series
        .iter()
        .map(|ys| {
            let m = ys.iter().sum::<f64>() / ys.len() as f64;
            ys.iter().map(|y| (y - m).powi(2)).sum::<f64>()
        })
        .sum();

    let steps = 59;
    let mut best_p = P_MIN;
    let mut best = f64::INFINITY;
    for k in 0..=steps {
        let p = P_MIN + (P_MAX - P_MIN) * k as f64 / steps as f64;
        let (s, _) = ssr_at(ts, series, p);
        if s < best {
            best = s;
            best_p = p;
        }
    }
    let h = (P_MAX - P_MIN) / steps as f64;
    let (mut a, mut b) = ((best_p - h).max(P_MIN), (best_p + h).min(P_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ssr_at(ts, series, c).0 < ssr_at(ts, series, d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let p = 0.5 * (a + b);
    let (ssr, params) = ssr_at(ts, series, p);
    let rel_ssr = if sst > 0.0 { ssr / sst } else { 0.0 };
    Some(TailFit {
        limit: params.iter().map(|&(l, _)| l).collect(),
        coef: params.iter().map(|&(_, c)| c).collect(),
        exponent: p,
        rel_ssr,
    })
}

/// Least-squares slope of `ln y` against `ln t`; all values must be positive.
pub fn loglog_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    if ts.len() < 2 || ts.len() != ys.len() || ts.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Some(linear_fit(&lx, &ly).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(t0: f64, r: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t0 * r.powi(k as i32)).collect()
    }

    #[test]
    fn recovers_inverse_sqrt_tail() {
        let ts = geometric(1e5, 1.25, 11);
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 / t.sqrt()).collect();
        let fit = fit_power_tail(&ts, &[ys]).unwrap();
        assert!((fit.limit[0] - 2.0).abs() < 1e-9, "{fit:?}");
        assert!((fit.exponent - 0.5).abs() < 1e-4);
        assert!(fit.rel_ssr < 1e-12);
    }

    #[test]
    fn shared_exponent_across_components() {
        let ts = geometric(10.0, 1.25, 12);
        let a: Vec<f64> = ts.iter().map(|t| 1.0 + 1.0 / t).collect();
        let b: Vec<f64> = ts.iter().map(|t| -0.5 - 4.0 / t).collect();
        let fit = fit_power_tail(&ts, &[a, b]).unwrap();
        assert!((fit.limit[0] - 1.0).abs() < 1e-9);
        assert!((fit.limit[1] + 0.5).abs() < 1e-9);
        assert!((fit.coef[1] + 4.0).abs() < 1e-6);
    }

    #[test]
    fn constant_series_is_exact() {
        let ts = geometric(1.0, 2.0, 5);
        let fit = fit_power_tail(&ts, &[vec![0.75; 5]]).unwrap();
        assert_eq!(fit.rel_ssr, 0.0);
        assert!((fit.limit[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let ts = geometric(1.0, 3.0, 6);
        let ys: Vec<f64> = ts.iter().map(|t| 5.0 * t.powf(-1.3)).collect();
        assert!((loglog_slope(&ts, &ys).unwrap() + 1.3).abs() < 1e-12);
        assert!(loglog_slope(&ts, &[1.0, -1.0, 1.0, 1.0, 1.0, 1.0]).is_none());
    }
}

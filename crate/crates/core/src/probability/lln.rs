use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::bernoulli::{chunk_rng, DoublingState, DyadicBits, DyadicState, CHUNK};
use super::ProbabilityError;

/// `P = k / 2^j` with `j ≤ 32`.
fn dyadic(p: f64) -> Result<(u64, u32), ProbabilityError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ProbabilityError::InvalidProbability(format!("P = {p} is not in (0, 1)")));
    }
    (1..=32u32)
        .find_map(|j| {
            let k = p * 2f64.powi(j as i32);
            (k.fract() == 0.0).then_some((k as u64, j))
        })
        .ok_or_else(|| ProbabilityError::InvalidProbability(format!("P = {p} is not a dyadic fraction k/2^j with j ≤ 32")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnEstimate {
    pub p: f64,
    pub n: usize,
    pub epsilon: f64,
    pub samples: usize,
    /// Estimated measure of `{|η/n − P| ≥ ε}`.
    pub measure: f64,
    /// Monte Carlo standard error of `measure`.
    pub std_error: f64,
    /// `P(1 − P) / (n ε²)`.
    pub chebyshev_bound: f64,
}

impl LlnEstimate {
    /// `measure ≤ chebyshev_bound + 3σ`.
    pub fn respects_chebyshev(&self) -> bool {
        self.measure <= self.chebyshev_bound + 3.0 * self.std_error
    }
}

/// Monte Carlo measure of the set of initial conditions whose orbit makes the frequency
/// of `n` equivalent events deviate from `P` by at least `ε`.
///
/// With `P = k/2^j` the events are "state < P at tick `j·i`", `i < n`; they read disjoint
/// blocks of `j` digits and are therefore independent with probability `P`.
pub fn lln_deviation_measure(p: f64, n: usize, epsilon: f64, samples: usize, seed: u64) -> Result<LlnEstimate, ProbabilityError> {
    let (_, j) = dyadic(p)?;
    if n == 0 || samples < 2 || !(epsilon > 0.0) {
        return Err(ProbabilityError::InvalidQuery("need n ≥ 1, at least two samples and ε > 0".into()));
    }
    let stride = j as usize;
    let deviating: usize = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count)
                .filter(|_| {
                    let mut x = DyadicState::new(DyadicBits::random(&mut rng, n * stride + 64));
                    let mut hits = 0usize;
                    for _ in 0..n {
                        hits += x.below(p) as usize;
                        for _ in 0..stride {
                            x = x.double();
                        }
                    }
                    (hits as f64 / n as f64 - p).abs() >= epsilon
                })
                .count()
        })
        .sum();
    let measure = deviating as f64 / samples as f64;
    Ok(LlnEstimate {
        p,
        n,
        epsilon,
        samples,
        measure,
        std_error: (measure * (1.0 - measure) / samples as f64).sqrt(),
        chebyshev_bound: p * (1.0 - p) / (n as f64 * epsilon * epsilon),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitPairTest {
    pub ticks: (usize, usize),
    /// Counts of `(E_i, E_j)` outcomes ordered `(no, no), (no, yes), (yes, no), (yes, yes)`.
    pub counts: [u64; 4],
    pub statistic: f64,
    /// Upper tail of χ² with three degrees of freedom.
    pub p_value: f64,
}

/// χ² test that `E_i = {state < 1/2 at tick i}` and `E_j` are independent fair events
/// under uniformly drawn initial conditions.
pub fn digit_pair_chi_square(ticks: (usize, usize), samples: usize, seed: u64) -> Result<DigitPairTest, ProbabilityError> {
    if ticks.0 == ticks.1 || samples < 16 {
        return Err(ProbabilityError::InvalidQuery("need two distinct ticks and at least 16 samples".into()));
    }
    let len = ticks.0.max(ticks.1) + 1;
    let counts = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut acc = [0u64; 4];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let bits = DyadicBits::random(&mut rng, len);
                // state < 1/2 at tick i ⟺ digit i is 0.
                let (a, b) = (!bits.bit(ticks.0) as usize, !bits.bit(ticks.1) as usize);
                acc[2 * a + b] += 1;
            }
            acc
        })
        .reduce(|| [0; 4], |x, y| [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]]);
    let expected = samples as f64 / 4.0;
    let statistic = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>();
    let chi = ChiSquared::new(3.0).map_err(|e| ProbabilityError::InvalidQuery(e.to_string()))?;
    Ok(DigitPairTest { ticks, counts, statistic, p_value: 1.0 - chi.cdf(statistic) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, Discrete};

    /// Exact `P(|η/n − p| ≥ ε)` for `η ~ Binomial(n, p)`.
    fn binomial_tail(p: f64, n: u64, eps: f64) -> f64 {
        let b = Binomial::new(p, n).unwrap();
        (0..=n).filter(|&k| (k as f64 / n as f64 - p).abs() >= eps).map(|k| b.pmf(k)).sum()
    }

    #[test]
    fn monte_carlo_matches_binomial_tail() {
        let est = lln_deviation_measure(0.5, 100, 0.1, 40_000, 11).unwrap();
        let exact = binomial_tail(0.5, 100, 0.1);
        assert!((est.measure - exact).abs() < 4.0 * est.std_error.max(1e-4), "{} vs {exact}", est.measure);
        let quarter = lln_deviation_measure(0.25, 64, 0.125, 40_000, 3).unwrap();
        let exact = binomial_tail(0.25, 64, 0.125);
        assert!((quarter.measure - exact).abs() < 4.0 * quarter.std_error.max(1e-4), "{} vs {exact}", quarter.measure);
    }

    #[test]
    fn full_width_deviation_is_impossible() {
        assert_eq!(lln_deviation_measure(0.5, 10, 1.0, 1000, 1).unwrap().measure, 0.0);
        assert!(lln_deviation_measure(0.3, 10, 0.1, 1000, 1).is_err());
    }

    #[test]
    fn results_do_not_depend_on_the_pool() {
        let a = lln_deviation_measure(0.5, 50, 0.1, 5000, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| lln_deviation_measure(0.5, 50, 0.1, 5000, 9).unwrap());
        assert_eq!(a, b);
    }
}

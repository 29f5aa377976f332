use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ProbabilityError;

/// A point of `[0, 1)` under the doubling map `x ↦ 2x mod 1`.
pub trait DoublingState: Clone {
    fn double(&self) -> Self;
    /// `x < threshold`, exact for rational states.
    fn below(&self, threshold: f64) -> bool;
    fn approx(&self) -> f64;
}

fn exact(threshold: f64) -> BigRational {
    BigRational::from_float(threshold).expect("finite threshold")
}

impl DoublingState for Ratio<i64> {
    fn double(&self) -> Self {
        let d = *self.denom();
        let n = (2 * self.numer()) % d;
        Ratio::new(n, d)
    }

    fn below(&self, threshold: f64) -> bool {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom())) < exact(threshold)
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl DoublingState for BigRational {
    fn double(&self) -> Self {
        let doubled = self * BigInt::from(2);
        if doubled >= BigRational::one() {
            doubled - BigRational::one()
        } else {
            doubled
        }
    }

    fn below(&self, threshold: f64) -> bool {
        *self < exact(threshold)
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Binary digits of a real in `[0, 1)`; bit 0 is the first digit after the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicBits {
    words: Vec<u64>,
    len: usize,
}

impl DyadicBits {
    pub fn random<R: Rng>(rng: &mut R, len: usize) -> Self {
        let words = (0..len.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
        Self { words, len }
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let len = words.len() * 64;
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, k: usize) -> bool {
        k < self.len && self.words[k / 64] >> (63 - k % 64) & 1 == 1
    }

    /// Digits `k .. k + 64` as an integer, zero-padded past the end.
    pub fn window(&self, k: usize) -> u64 {
        let (w, s) = (k / 64, k % 64);
        let hi = self.words.get(w).copied().unwrap_or(0);
        if s == 0 {
            return hi;
        }
        let lo = self.words.get(w + 1).copied().unwrap_or(0);
        (hi << s) | (lo >> (64 - s))
    }
}

/// The state `2^shift · x mod 1` of a real initial condition given by its digits.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicState {
    bits: Arc<DyadicBits>,
    shift: usize,
}

impl DyadicState {
    pub fn new(bits: DyadicBits) -> Self {
        Self { bits: Arc::new(bits), shift: 0 }
    }

    pub fn shift(&self) -> usize {
        self.shift
    }
}

impl DoublingState for DyadicState {
    fn double(&self) -> Self {
        Self { bits: self.bits.clone(), shift: self.shift + 1 }
    }

    fn below(&self, threshold: f64) -> bool {
        if threshold >= 1.0 {
            return true;
        }
        if threshold <= 0.0 {
            return false;
        }
        // Compare 64 digits against the threshold scaled to 2^64, exact for thresholds with ≤ 64 digits.
        let w = self.bits.window(self.shift);
        let t = (threshold * 2f64.powi(64)) as u128;
        (w as u128) < t
    }

    fn approx(&self) -> f64 {
        (self.bits.window(self.shift) >> 11) as f64 / 2f64.powi(53)
    }
}

/// `x₀, f(x₀), …` with `horizon` entries.
pub fn orbit<S: DoublingState>(x0: S, horizon: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(horizon);
    let mut x = x0;
    for _ in 0..horizon {
        let next = x.double();
        out.push(x);
        x = next;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "snake_case")]
pub enum TickPredicate {
    Below(f64),
    AtLeast(f64),
}

impl TickPredicate {
    pub fn holds<S: DoublingState>(&self, x: &S) -> bool {
        match *self {
            TickPredicate::Below(t) => x.below(t),
            TickPredicate::AtLeast(t) => !x.below(t),
        }
    }
}

/// A conjunction of per-tick conditions on a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub conditions: Vec<(usize, TickPredicate)>,
}

impl EventSpec {
    pub fn at_tick(tick: usize, predicate: TickPredicate) -> Self {
        Self { conditions: vec![(tick, predicate)] }
    }

    pub fn and(mut self, tick: usize, predicate: TickPredicate) -> Self {
        self.conditions.push((tick, predicate));
        self
    }

    /// Whether the trajectory (long enough to cover every tick) belongs to the event.
    pub fn holds<S: DoublingState>(&self, orbit: &[S]) -> Result<bool, ProbabilityError> {
        let mut all = true;
        for &(tick, p) in &self.conditions {
            let x = orbit
                .get(tick)
                .ok_or_else(|| ProbabilityError::InvalidQuery(format!("tick {tick} lies beyond a horizon of {}", orbit.len())))?;
            all &= p.holds(x);
        }
        Ok(all)
    }
}

/// Hits over ticks, kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    pub hits: u64,
    pub ticks: u64,
}

impl Frequency {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.hits, self.ticks.max(1))
    }

    pub fn value(&self) -> f64 {
        self.hits as f64 / self.ticks.max(1) as f64
    }
}

pub fn relative_frequency<S: DoublingState>(orbit: &[S], predicate: &TickPredicate) -> Frequency {
    Frequency { hits: orbit.iter().filter(|x| predicate.holds(*x)).count() as u64, ticks: orbit.len() as u64 }
}

/// Initial condition of a toy universe: an exact rational or a uniformly drawn real.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Rational(BigRational),
    Random { seed: u64 },
}

impl FromStr for InitialCondition {
    type Err = ProbabilityError;

    /// Accepts `p/q`, a terminating decimal such as `0.375` (read exactly), or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ProbabilityError::Parse(format!("'{s}' is neither p/q, a decimal nor random:SEED"));
        if let Some(seed) = s.strip_prefix("random:") {
            return Ok(Self::Random { seed: seed.parse().map_err(|_| bad())? });
        }
        let x = if let Some((int, frac)) = s.split_once('.') {
            let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32))
        } else {
            BigRational::from_str(s).map_err(|_| bad())?
        };
        if x < BigRational::zero() || x >= BigRational::one() {
            return Err(ProbabilityError::InvalidQuery(format!("initial condition {x} is outside [0, 1)")));
        }
        Ok(Self::Rational(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliUniverse {
    pub initial: InitialCondition,
    pub horizon: usize,
}

/// One tick of an orbit in printable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub tick: usize,
    /// Exact `p/q` for rational orbits, otherwise the leading 53 digits as a decimal.
    pub state: String,
    pub value: f64,
}

impl BernoulliUniverse {
    pub fn new(initial: InitialCondition, horizon: usize) -> Result<Self, ProbabilityError> {
        if horizon == 0 {
            return Err(ProbabilityError::InvalidQuery("horizon must be at least one tick".into()));
        }
        Ok(Self { initial, horizon })
    }

    fn random_state(&self, seed: u64) -> DyadicState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DyadicState::new(DyadicBits::random(&mut rng, self.horizon + 64))
    }

    pub fn orbit_points(&self) -> Vec<OrbitPoint> {
        match &self.initial {
            InitialCondition::Rational(x) => orbit(x.clone(), self.horizon)
                .into_iter()
                .enumerate()
                .map(|(tick, x)| OrbitPoint { tick, value: x.approx(), state: x.to_string() })
                .collect(),
            InitialCondition::Random { seed } => orbit(self.random_state(*seed), self.horizon)
                .into_iter()
                .enumerate()
                .map(|(tick, x)| OrbitPoint { tick, value: x.approx(), state: format!("{:.17}", x.approx()) })
                .collect(),
        }
    }

    pub fn frequency(&self, predicate: &TickPredicate) -> Frequency {
        match &self.initial {
            InitialCondition::Rational(x) => relative_frequency(&orbit(x.clone(), self.horizon), predicate),
            InitialCondition::Random { seed } => relative_frequency(&orbit(self.random_state(*seed), self.horizon), predicate),
        }
    }
}

/// Samples per RNG stream; fixing it keeps results independent of the thread count.
pub(crate) const CHUNK: usize = 1024;

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySample {
    pub horizon: usize,
    pub samples: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

/// Frequencies of `predicate` along orbits of uniformly drawn initial conditions.
pub fn sample_frequencies(
    horizon: usize,
    samples: usize,
    seed: u64,
    predicate: &TickPredicate,
) -> Result<FrequencySample, ProbabilityError> {
    if horizon == 0 || samples < 2 {
        return Err(ProbabilityError::InvalidQuery("need a positive horizon and at least two samples".into()));
    }
    let freqs: Vec<f64> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count)
                .map(|_| {
                    let x = DyadicState::new(DyadicBits::random(&mut rng, horizon + 64));
                    relative_frequency(&orbit(x, horizon), predicate).value()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = freqs.len() as f64;
    let mean = freqs.iter().sum::<f64>() / n;
    let var = freqs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FrequencySample { horizon, samples, mean, std_error: (var / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Ratio<i64> {
        Ratio::new(p, q)
    }

    #[test]
    fn seventh_has_period_three() {
        let o = orbit(r(1, 7), 6);
        assert_eq!(o, vec![r(1, 7), r(2, 7), r(4, 7), r(1, 7), r(2, 7), r(4, 7)]);
        let f = relative_frequency(&orbit(r(1, 7), 3 * 1000), &TickPredicate::Below(0.5));
        assert_eq!(f.ratio(), Ratio::new(2, 3));
        assert_eq!(orbit(r(1, 3), 4), vec![r(1, 3), r(2, 3), r(1, 3), r(2, 3)]);
        assert!(orbit(r(0, 1), 5).iter().all(|x| *x == r(0, 1)));
        assert_eq!(relative_frequency(&orbit(r(0, 1), 9), &TickPredicate::Below(0.5)).ratio(), Ratio::new(1, 1));
    }

    #[test]
    fn big_rationals_match_machine_rationals() {
        let a = orbit(r(5, 12), 40);
        let b = orbit(BigRational::new(5.into(), 12.into()), 40);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(BigRational::new((*x.numer()).into(), (*x.denom()).into()), *y);
        }
    }

    #[test]
    fn parsing_is_exact() {
        let InitialCondition::Rational(x) = "0.375".parse().unwrap() else { panic!() };
        assert_eq!(x, BigRational::new(3.into(), 8.into()));
        assert!("1.5".parse::<InitialCondition>().is_err());
        assert_eq!("random:7".parse::<InitialCondition>().unwrap(), InitialCondition::Random { seed: 7 });
    }

    #[test]
    fn dyadic_states_read_their_digits() {
        // x = 0.1011 0000… in binary.
        let bits = DyadicBits::from_words(vec![0b1011u64 << 60, 0]);
        let o = orbit(DyadicState::new(bits), 4);
        let below: Vec<bool> = o.iter().map(|x| x.below(0.5)).collect();
        assert_eq!(below, vec![false, true, false, false]);
        assert_eq!(o[0].approx(), 0.6875);
    }
}

use aml_core::geometry::IntervalBox;
use aml_core::probability::*;
use aml_core::quantum::{asymptotic_quantum_measure, GridSpec, PointSourceSpec, QuantumPotential};
use num_rational::Ratio;
use proptest::prelude::*;

/// Multiplicative order of 2 modulo an odd `q`.
fn order_of_two(q: i64) -> usize {
    if q == 1 {
        return 1;
    }
    let mut x = 2 % q;
    let mut k = 1;
    while x != 1 {
        x = 2 * x % q;
        k += 1;
    }
    k
}

proptest! {
    #[test]
    fn odd_denominators_are_periodic(half_q in 1i64..500, p_raw in 0i64..1000, reps in 1usize..5) {
        let q = 2 * half_q + 1;
        let x0 = Ratio::new(p_raw % q, q);
        let period = order_of_two(*x0.denom()).max(1);
        let o = orbit(x0, period * reps + 1);
        prop_assert_eq!(o[period], o[0]);
        let one = relative_frequency(&o[..period], &TickPredicate::Below(0.5));
        let many = relative_frequency(&o[..period * reps], &TickPredicate::Below(0.5));
        prop_assert_eq!(one.ratio(), many.ratio());
    }

    #[test]
    fn measurement_ratio_ignores_the_scale(e in 1e-6f64..10.0, frac in 0.0f64..1.0, scale in 1e-8f64..1e8, frac2 in 0.0f64..1.0) {
        let q = MeasurementQuery { experiment_mass: e, result_mass: frac * e };
        let scaled = MeasurementQuery { experiment_mass: e * scale, result_mass: frac * e * scale };
        let (a, b) = (measurement_probability(&q).unwrap(), measurement_probability(&scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
        let inner = MeasurementQuery { experiment_mass: e, result_mass: frac * frac2 * e };
        prop_assert!(measurement_probability(&inner).unwrap() <= a);
    }
}

#[test]
fn named_orbits() {
    let universe = BernoulliUniverse::new("1/7".parse().unwrap(), 6).unwrap();
    let states: Vec<String> = universe.orbit_points().into_iter().map(|p| p.state).collect();
    assert_eq!(states, ["1/7", "2/7", "4/7", "1/7", "2/7", "4/7"]);
    for k in [1, 10, 333] {
        let u = BernoulliUniverse::new("1/7".parse().unwrap(), 3 * k).unwrap();
        assert_eq!(u.frequency(&TickPredicate::Below(0.5)).ratio(), Ratio::new(2, 3));
    }
    let third = BernoulliUniverse::new("1/3".parse().unwrap(), 4).unwrap();
    let states: Vec<String> = third.orbit_points().into_iter().map(|p| p.state).collect();
    assert_eq!(states, ["1/3", "2/3", "1/3", "2/3"]);
    let zero = BernoulliUniverse::new("0".parse().unwrap(), 50).unwrap();
    assert_eq!(zero.frequency(&TickPredicate::Below(0.5)).ratio(), Ratio::new(1, 1));
}

#[test]
fn typical_orbits_spend_half_their_time_below_a_half() {
    let s = sample_frequencies(1000, 10_000, 2024, &TickPredicate::Below(0.5)).unwrap();
    // Independent fair digits: each frequency has variance 1/(4·1000).
    let sigma = (0.25 / 1000.0 / 10_000.0f64).sqrt();
    assert!((s.mean - 0.5).abs() <= 3.0 * sigma, "{} ± {sigma}", s.mean);
    assert!((s.std_error - sigma).abs() < 0.1 * sigma);
}

#[test]
fn digit_events_are_pairwise_independent() {
    for (i, ticks) in [(0, 1), (3, 40), (17, 18), (5, 200)].into_iter().enumerate() {
        let t = digit_pair_chi_square(ticks, 40_000, 100 + i as u64).unwrap();
        assert!(t.p_value > 1e-3, "{ticks:?}: χ² = {} (p = {})", t.statistic, t.p_value);
        let joint = t.counts[3] as f64 / 40_000.0;
        assert!((joint - 0.25).abs() < 4.0 * (0.25 * 0.75 / 40_000.0f64).sqrt());
    }
}

#[test]
fn deviation_measure_shrinks_and_obeys_chebyshev() {
    for eps in [0.05, 0.1] {
        let mut last = f64::INFINITY;
        for n in [100, 1000, 10_000] {
            let est = lln_deviation_measure(0.5, n, eps, 4000, 7).unwrap();
            assert!(est.respects_chebyshev(), "{est:?}");
            assert!(est.measure <= last);
            if last > 0.0 && last.is_finite() {
                assert!(est.measure < last, "{est:?} after {last}");
            }
            last = est.measure;
        }
    }
}

#[test]
fn events_are_evaluated_on_orbits() {
    let o = orbit(Ratio::new(1i64, 7), 4);
    let e = EventSpec::at_tick(0, TickPredicate::Below(0.5)).and(2, TickPredicate::AtLeast(0.5));
    assert!(e.holds(&o).unwrap());
    assert!(!EventSpec::at_tick(2, TickPredicate::Below(0.5)).holds(&o).unwrap());
    assert!(EventSpec::at_tick(9, TickPredicate::Below(0.5)).holds(&o).is_err());
}

#[test]
fn symmetric_source_splits_evenly() {
    let spec = GridSpec::new(1, 4096, 25.6, 1.0);
    let source = PointSourceSpec::at_origin(1, 0.1);
    let boxes = [IntervalBox::interval(-1.0, 1.0).unwrap(), IntervalBox::interval(-1.0, 0.0).unwrap()];
    let run = asymptotic_quantum_measure::<f64>(&spec, &source, &QuantumPotential::free(), &boxes, &[0.5], 0.01).unwrap();
    let q = MeasurementQuery { experiment_mass: run.limit[0], result_mass: run.limit[1] };
    assert!((measurement_probability(&q).unwrap() - 0.5).abs() < 1e-10);
}

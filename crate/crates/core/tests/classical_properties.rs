use aml_core::classical::{
    barrier_trajectory_oracle, integrate_nbigbang, IntegrationOptions, PairSpec, PotentialSpec, SystemSpec,
};
use aml_core::geometry::{estimate_asymptotic_velocity, Mat3, Vec3};
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vec3<f64>> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn smooth_potential() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        Just(PotentialSpec::Zero),
        (-1.0..1.0f64, 0.5..2.0f64).prop_map(|(v0, w)| PotentialSpec::Gaussian { v0, w }),
        (-0.5..0.5f64, 0.5..2.0f64).prop_map(|(q, s)| PotentialSpec::SoftCoulomb { q, s }),
    ]
}

fn catalog_potential() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        smooth_potential(),
        (0.1..1.0f64, 0.5..2.0f64).prop_map(|(v0, a)| PotentialSpec::SquareBarrier { v0, a }),
    ]
}

fn pair_system(n: usize, potential: PotentialSpec) -> SystemSpec {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push(PairSpec { i, j, potential: potential.clone() });
        }
    }
    SystemSpec { masses: (0..n).map(|k| 1.0 + 0.5 * k as f64).collect(), pair_potentials: pairs, external: None }
}

/// Initial velocities bounded away from each other so that trajectories separate.
fn spread_velocities(n: usize) -> impl Strategy<Value = Vec<Vec3<f64>>> {
    proptest::collection::vec(vec3(0.5), n).prop_map(|vs| {
        vs.into_iter().enumerate().map(|(i, v)| v + Vec3::new(1.5 * i as f64 - 1.0, 0.7, 0.0)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classical_bigbangs_are_asymptotically_regular(
        potential in catalog_potential(),
        vs in spread_velocities(2),
        external in any::<bool>(),
    ) {
        let sys = if external {
            SystemSpec { masses: vec![1.0, 2.0], pair_potentials: Vec::new(), external: Some(potential) }
        } else {
            pair_system(2, potential)
        };
        let opts = IntegrationOptions { t_final: 1e4, dt: 2e-3, first_sample: 1.0, ..Default::default() };
        let run = integrate_nbigbang(&sys, &vs, &opts).unwrap();
        for tr in run.bigbang.trajectories() {
            let est = estimate_asymptotic_velocity(tr, 1e-2).unwrap();
            prop_assert!(est.converged, "{:?}", est.windows);
        }
    }

    #[test]
    fn boosted_initial_data_gives_boosted_motion(
        potential in smooth_potential(),
        vs in spread_velocities(3),
        v0 in vec3(1.0),
        angle in -3.0..3.0f64,
    ) {
        let sys = pair_system(3, potential);
        let r = Mat3::rotation(Vec3::new(0.3, -0.4, 1.0), angle);
        let opts = IntegrationOptions { t_final: 50.0, dt: 1e-2, first_sample: 0.1, ..Default::default() };
        let base = integrate_nbigbang(&sys, &vs, &opts).unwrap();
        let boosted_v: Vec<_> = vs.iter().map(|&v| r.apply(v) - v0).collect();
        let boosted = integrate_nbigbang(&sys, &boosted_v, &opts).unwrap();
        for (a, b) in base.bigbang.trajectories().iter().zip(boosted.bigbang.trajectories()) {
            for (&(t, x), &(tb, xb)) in a.samples().iter().zip(b.samples()) {
                prop_assert_eq!(t, tb);
                let expect = r.apply(x) - v0 * t;
                prop_assert!((xb - expect).norm() < 1e-8 * (1.0 + expect.norm()));
            }
        }
    }

    #[test]
    fn energy_is_conserved_for_smooth_potentials(potential in smooth_potential(), vs in spread_velocities(2)) {
        let sys = pair_system(2, potential.clone());
        let opts = IntegrationOptions { t_final: 200.0, ..Default::default() };
        let run = integrate_nbigbang(&sys, &vs, &opts).unwrap();
        prop_assert!(run.energy_drift < 1e-6, "{potential:?}: {}", run.energy_drift);
    }
}

#[test]
fn symmetric_pair_has_symmetric_asymptotics() {
    let sys = pair_system(2, PotentialSpec::SoftCoulomb { q: 1.0, s: 0.5 });
    let sys = SystemSpec { masses: vec![1.0, 1.0], ..sys };
    let v = Vec3::new(0.8, 0.3, -0.2);
    let opts = IntegrationOptions { t_final: 1e4, dt: 2e-3, first_sample: 1.0, ..Default::default() };
    let run = integrate_nbigbang(&sys, &[v, -v], &opts).unwrap();
    let w: Vec<_> = run
        .bigbang
        .trajectories()
        .iter()
        .map(|tr| estimate_asymptotic_velocity(tr, 1e-2).unwrap().value)
        .collect();
    assert!((w[0] + w[1]).norm() < 1e-9);
    // Repulsion speeds both particles up.
    assert!(w[0].norm() > v.norm());
}

#[test]
fn smoothed_barrier_tracks_closed_form() {
    let (m, v0, a) = (1.0, 0.5, 1.0);
    let opts = IntegrationOptions { t_final: 20.0, dt: 1e-4, first_sample: 0.05, smoothing: 1e-2, ..Default::default() };
    let delta = opts.smoothing * a;
    for v_i in [2.0f64, 0.7, -1.3] {
        let sys = SystemSpec::single(m, PotentialSpec::SquareBarrier { v0, a });
        let run = integrate_nbigbang(&sys, &[Vec3::new(v_i, 0.0, 0.0)], &opts).unwrap();
        for &(t, x) in run.bigbang.trajectories()[0].samples() {
            if x.x.abs() > a + delta {
                let exact = barrier_trajectory_oracle(m, v0, a, v_i, t);
                assert!((x.x - exact).abs() < 5.0 * delta, "v_I = {v_i}, t = {t}: {} vs {exact}", x.x);
            }
        }
    }
}

#[test]
fn particle_at_rest_on_the_plateau_stays_put() {
    let sys = SystemSpec::single(1.0, PotentialSpec::SquareBarrier { v0: 0.5, a: 1.0 });
    let run = integrate_nbigbang(&sys, &[Vec3::<f64>::zero()], &IntegrationOptions { t_final: 10.0, ..Default::default() }).unwrap();
    assert!(run.bigbang.trajectories()[0].samples().iter().all(|s| s.1 == Vec3::zero()));
}

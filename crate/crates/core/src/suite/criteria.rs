use std::f64::consts::PI;

use num_rational::Ratio;

use super::oracle;
use super::Check;
use crate::classical::{
    barrier_flow, barrier_trajectory_oracle, cross_section_from_table, deflection_function, integrate_nbigbang,
    reverse_emission_density, solve_asymptotic_boundary_condition, IntegrationOptions, PotentialSpec, ScatteringOptions,
    SystemSpec,
};
use crate::geometry::{
    classify_transform, default_probes, estimate_asymptotic_transform, estimate_asymptotic_velocity, CausalTransform,
    GeometryError, IntervalBox, Mat3, PlusSource, RayConfig, SampledTrajectory, TransformClass, TransformSpec, Vec3,
};
use crate::measures::{
    ncdic_report, pullback, quotient_measure, BoxMeasure, GroupActionSpec, MeasurableMap, NcdicConfig,
    PullbackOptions, QuantumEta, QuotientOptions, UniformMeasure,
};
use crate::probability::{lln_deviation_measure, BernoulliUniverse, TickPredicate};
use crate::quantum::{
    aet_invariance_check, box_mass, evolve, semiclassical_density_compare, sigma_ladder, two_source_toy, AetOptions,
    GridSpec, PointSourceSpec, QuantumPotential,
};

type Checks = Result<Vec<Check>, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn iv(a: f64, b: f64) -> Result<IntervalBox<f64>, String> {
    IntervalBox::interval(a, b).map_err(err)
}

pub(super) fn velocity_examples() -> Checks {
    let v = Vec3::new(1.0, 0.0, 0.0);
    let x0 = Vec3::new(0.3, -0.2, 0.5);
    let a = SampledTrajectory::geometric(1.0, 1e4, |t: f64| v * t + x0 * (2.0 * t).sin()).map_err(err)?;
    let est_a = estimate_asymptotic_velocity(&a, 1e-3).map_err(err)?;

    let dir = Vec3::new(1.0, -2.0, 0.5);
    let b = SampledTrajectory::geometric(1.0, 1e6, |t: f64| dir * t.powf(0.5) + x0).map_err(err)?;
    let est_b = estimate_asymptotic_velocity(&b, 2e-3).map_err(err)?;

    let c = SampledTrajectory::geometric(1.0, 1e4, |t: f64| v * (t * (2.0 * t).sin())).map_err(err)?;
    let c_result = estimate_asymptotic_velocity(&c, 1e-3);
    Ok(vec![
        Check::at_most("v t + x0 sin 2t at T = 1e4: |ω̂ − v|", (est_a.value - v).norm(), 1e-3),
        Check::at_most("a t^0.5 + x0 at T = 1e6: |ω̂|", est_b.value.norm(), 2e-3),
        Check::new(
            "v t sin 2t is not asymptotically regular",
            matches!(c_result, Err(GeometryError::NotConverged(_))),
            format!("{c_result:?}"),
        ),
    ])
}

fn algebra_catalog() -> Vec<TransformSpec> {
    vec![
        TransformSpec::Galilean { axis: [0.3, -0.2, 1.0], angle: 1.1, v0: [0.5, -1.5, 2.0], x0: [1.0, 2.0, 3.0], t_shift: 0.5 },
        TransformSpec::Scale { a: 2.5 },
        TransformSpec::LogDrift { c: 1.5, axis: [0.0, 1.0, 0.0] },
        TransformSpec::Swirl { theta_inf: 0.7, tau: 2.0, axis: [1.0, 0.0, 0.0] },
        TransformSpec::ShearOverT { k: 0.8, q: 0.0 },
    ]
}

pub(super) fn transform_algebra() -> Checks {
    const TOL: f64 = 1e-3;
    let probes: Vec<Vec3<f64>> = default_probes();
    let cfg = RayConfig::default();
    let catalog = algebra_catalog();
    let mut worst_comp: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    for f in &catalog {
        let fb = f.build::<f64>();
        let inv = f.inverse().build::<f64>().without_analytic_plus();
        for g in &catalog {
            let gb = g.build::<f64>();
            let composed = fb.then(&gb).without_analytic_plus();
            for &v in &probes {
                let expected = gb.analytic_plus(fb.analytic_plus(v).ok_or("missing f⁺")?).ok_or("missing g⁺")?;
                let got = estimate_asymptotic_transform(&composed, v, TOL / 10.0, cfg).map_err(err)?;
                worst_comp = worst_comp.max((got - expected).norm());
            }
        }
        for &v in &probes {
            let w = fb.analytic_plus(v).ok_or("missing f⁺")?;
            let back = estimate_asymptotic_transform(&inv, w, TOL / 10.0, cfg).map_err(err)?;
            worst_inv = worst_inv.max((back - v).norm());
        }
    }

    let classify = |f: &CausalTransform<f64>, source| classify_transform(f, &probes, TOL, source, cfg).map_err(err);
    let mut checks = vec![
        Check::at_most("(g∘f)⁺ = g⁺∘f⁺ over the catalog and 13 probes", worst_comp, TOL),
        Check::at_most("(f⁻¹)⁺∘f⁺ = id over the catalog and 13 probes", worst_inv, TOL),
    ];
    for spec in &catalog {
        let c = classify(&spec.build(), PlusSource::Estimated)?;
        let (ok, detail) = match (spec, &c.class) {
            (TransformSpec::Scale { .. } | TransformSpec::LogDrift { .. }, TransformClass::AsymptoticallyIdentical) => {
                (true, "identical".to_string())
            }
            (
                TransformSpec::Galilean { .. } | TransformSpec::Swirl { .. },
                TransformClass::AsymptoticallyEuclidean { rotation, v0 },
            ) => {
                let (r, w) = spec.euclidean_parts().ok_or("no Euclidean parts")?;
                let e = rotation.max_abs_diff(&r).max((*v0 - w).norm());
                (e < TOL, format!("euclidean, parameter error {e:.2e}"))
            }
            (TransformSpec::ShearOverT { .. }, TransformClass::Other) => (true, "other".to_string()),
            (_, class) => (false, format!("{class:?}")),
        };
        checks.push(Check::new(format!("{} classifies as expected", spec.name()), ok, detail));
    }
    let collapse = classify(&TransformSpec::ShearOverT { k: 0.0, q: 1.0 }.build(), PlusSource::Estimated)?;
    checks.push(Check::new("x/t collapses every velocity: other", collapse.class == TransformClass::Other, format!("{:?}", collapse.class)));

    let gal = &catalog[0];
    let c = classify(&gal.build(), PlusSource::PreferAnalytic)?;
    let (r, w) = gal.euclidean_parts().ok_or("no Euclidean parts")?;
    let (fit_r, fit_v) = match c.class {
        TransformClass::AsymptoticallyEuclidean { rotation, v0 } => (rotation, v0),
        other => return Err(format!("galilean classified {other:?}")),
    };
    checks.push(Check::at_most("galilean with analytic f⁺: |R̂ − R|", fit_r.max_abs_diff(&r), 1e-6));
    checks.push(Check::at_most("galilean with analytic f⁺: |v̂0 − v0|", (fit_v - w).norm(), 1e-6));
    let identity_fit = fit_r.mul(&fit_r.transpose()).max_abs_diff(&Mat3::identity());
    checks.push(Check::at_most("fitted R is orthogonal", identity_fit, 1e-6));
    Ok(checks)
}

pub(super) fn barrier_oracle() -> Checks {
    let (m, v0, a) = (1.0, 0.5, 1.0);
    let opts = IntegrationOptions { t_final: 20.0, dt: 1e-4, first_sample: 0.05, smoothing: 1e-3, ..Default::default() };
    let delta = opts.smoothing * a;
    let mut worst: f64 = 0.0;
    for v_i in [2.0f64, 0.7, -1.3, 1.05] {
        let sys = SystemSpec::single(m, PotentialSpec::SquareBarrier { v0, a });
        let run = integrate_nbigbang(&sys, &[Vec3::new(v_i, 0.0, 0.0)], &opts).map_err(err)?;
        for &(t, x) in run.bigbang.trajectories()[0].samples() {
            if x.x.abs() > a + delta {
                worst = worst.max((x.x - barrier_trajectory_oracle(m, v0, a, v_i, t)).abs());
            }
        }
    }
    let ts: Vec<f64> = (3..=6).flat_map(|k| [1.0, 2.0, 5.0].map(|c| c * 10f64.powi(k))).collect();
    let fast = solve_asymptotic_boundary_condition(m, v0, a, 3.0, &ts).map_err(err)?;
    let slow = solve_asymptotic_boundary_condition(m, v0, a, 0.5, &ts).map_err(err)?;
    let slope = slow.decay_exponent.ok_or("no decay exponent for v inside the gap")?;
    Ok(vec![
        Check::at_most("Verlet vs closed form outside |x| ≤ a + δ", worst, 5e-3),
        Check::close("v = 3 → v_I", fast.v_i_limit, 8f64.sqrt(), 1e-6),
        Check::close("v = 3 → v_I against √(v² − 2V0/m)", fast.v_i_limit, oracle::barrier_initial_speed(m, v0, 3.0), 1e-6),
        Check::new("v = 0.5 is degenerate", slow.degenerate, format!("{:?}", slow.v_i_of_t.last())),
        Check::close("v = 0.5: decay exponent of v_I(t)", slope, -1.0, 0.05),
    ])
}

pub(super) fn free_quantum_measure() -> Checks {
    let m = 1.0;
    let spec = GridSpec::new(1, 4096, 25.6, m);
    let (d1, d2) = ((0.0, 0.5), (0.5, 1.5));
    let boxes = [iv(d1.0, d1.1)?, iv(d2.0, d2.1)?];
    let lebesgue = (m * (d2.1 - d2.0)) / (m * (d1.1 - d1.0));
    let t_final = 0.4;
    let ladder = sigma_ladder::<f64>(&spec, &[0.0], &[0.2, 0.1, 0.05], &QuantumPotential::free(), &boxes, &[0.1, 0.2, t_final], 0.01)
        .map_err(err)?;
    let ratios: Vec<f64> = ladder.runs.iter().map(|r| r.limit[1] / r.limit[0]).collect();
    let errors: Vec<f64> = ratios.iter().map(|r| (r / lebesgue - 1.0).abs()).collect();
    let mut checks = vec![
        Check::at_most("smallest σ, largest t: |ratio / Lebesgue − 1|", *errors.last().unwrap(), 0.02),
        Check::new("ratio error shrinks along the σ ladder", errors.windows(2).all(|e| e[1] < e[0]), format!("{errors:?}")),
    ];
    for (s, r) in ladder.sigmas.iter().zip(&ratios) {
        let g = |d: (f64, f64)| oracle::gaussian_cone_mass(d.0, d.1, *s, m, t_final);
        let exact = g(d2) / g(d1);
        checks.push(Check::close(format!("σ = {s}: ratio vs Gaussian spreading oracle"), *r, exact, 1e-3 * exact));
    }

    let (sigma, boost, t) = (0.1, 0.75, 0.4);
    let plain = PointSourceSpec::at_origin(1, sigma).state::<f64>(&spec).map_err(err)?;
    let mut boosted = plain.clone();
    boosted.boost(&[boost]).map_err(err)?;
    let free = QuantumPotential::free();
    let plain = evolve(&plain, &free, t, 1.0).map_err(err)?;
    let boosted = evolve(&boosted, &free, t, 1.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    for d in [iv(0.5, 1.5)?, iv(-1.0, 0.25)?, iv(1.0, 4.0)?] {
        let shifted = d.translated(&[-boost]);
        let a = box_mass(&boosted, &d.scaled(t)).map_err(err)?;
        let b = box_mass(&plain, &shifted.scaled(t)).map_err(err)?;
        worst = worst.max((a - b).abs() / b);
    }
    checks.push(Check::at_most("boost: μ_boosted(Δ) = μ(Δ − v0), relative", worst, 0.01));
    Ok(checks)
}

pub(super) fn aet_invariance() -> Checks {
    const TIMES: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let spec = GridSpec::new(1, 16384, 600.0, 1.0);
    let source = PointSourceSpec::at_origin(1, 0.5);
    let free = QuantumPotential::free();
    let i = iv(0.2, 1.2)?;
    let c = 0.5;
    let drift = TransformSpec::LogDrift { c, axis: [1.0, 0.0, 0.0] }.build::<f64>();
    let rep = aet_invariance_check::<f64>(&spec, &source, &free, &drift, &i, &[0.2, 0.1], &TIMES, 1.0, &AetOptions::default())
        .map_err(err)?;
    let mut checks = Vec::new();
    for row in &rep.sandwich {
        let oracle_t = oracle::log_drift_entry_time(c, row.eps, &TIMES);
        let ok = match (row.t0, oracle_t) {
            (Some(t0), Some(needed)) => t0 <= needed,
            _ => false,
        };
        checks.push(Check::new(
            format!("ε = {}: sandwich holds from t0 on", row.eps),
            ok,
            format!("t0 = {:?}, drift bound reached at {oracle_t:?}", row.t0),
        ));
    }
    checks.push(Check::at_most("|μ_Qt[f(I)] − μ_Qt[I]| / μ_Qt[I] at the largest t", rep.final_relative_gap, 0.05));
    checks.push(Check::new("log_drift reports no violation", !rep.violation, ""));
    let boost = TransformSpec::Galilean { axis: [0.0, 0.0, 1.0], angle: 0.0, v0: [1.5, 0.0, 0.0], x0: [0.0; 3], t_shift: 0.0 }
        .build::<f64>();
    let opts = AetOptions { enforce_identity: false, ..AetOptions::default() };
    let control = aet_invariance_check::<f64>(&spec, &source, &free, &boost, &i, &[0.2], &TIMES, 1.0, &opts).map_err(err)?;
    checks.push(Check::new(
        "boost control reports a violation",
        control.violation,
        format!("final gap {:.3e}", control.final_relative_gap),
    ));
    Ok(checks)
}

pub(super) fn corrected_transfer() -> Checks {
    let (m, v0, a, b) = (1.0, 0.5, 1.0, 1.0);
    let spec = GridSpec::new(1, 4096, 128.0, m);
    let pot = QuantumPotential::central(PotentialSpec::SquareBarrier { v0, a });
    let mut eta = QuantumEta::new(&spec, &PointSourceSpec::at_origin(1, 0.5), &pot, 0.01).map_err(err)?;
    let delta = iv(-b, b)?;
    let rep = crate::measures::corrected_transfer(&mut eta, &barrier_flow(m, v0, a), &delta, &[5.0, 10.0, 20.0]).map_err(err)?;
    let edge = oracle::gap_window(m, v0, b);
    let cone = eta.cone_measure();
    let mu_q = cone.mass(&iv(-edge, edge)?).map_err(err)?;
    let lenient = PullbackOptions { strict: false, ..Default::default() };
    let naive = pullback(&cone, &MeasurableMap::barrier_omega_v(m, v0), &[delta], &lenient).map_err(err)?;
    let naive_mass = naive.measure.total();
    Ok(vec![
        Check::close("corrected transfer vs μ_Q([−√(2V0/m+b²), √(2V0/m+b²)])", rep.limit, mu_q, 0.05 * mu_q),
        Check::new("corrected > naive pullback", rep.limit > naive_mass, format!("{:.6} vs {naive_mass:.6}", rep.limit)),
        Check::new("naive pullback flags the discontinuity at 0", naive.invalid == vec![0], format!("{:?}", naive.invalid)),
    ])
}

pub(super) fn quotient() -> Checks {
    let lebesgue = UniformMeasure::lebesgue(2);
    let base = [iv(0.25, 0.95)?];
    let opts = QuotientOptions::default();
    let q = quotient_measure(&lebesgue, &GroupActionSpec::along_axis(0, (-0.4, 0.9)), &base, &opts).map_err(err)?;
    let other = quotient_measure(&lebesgue, &GroupActionSpec::along_axis(0, (3.0, 7.5)), &base, &opts).map_err(err)?;
    Ok(vec![
        Check::close("strip quotient = interval length", q.measure.total(), 0.7, 1e-12),
        Check::at_most("transversal independence", q.transversal_deviation, 1e-12),
        Check::at_most("Δ_G independence within one window", q.window_deviation, 1e-12),
        Check::close("Δ_G independence across windows", other.measure.total(), q.measure.total(), 1e-12),
    ])
}

pub(super) fn bernoulli() -> Checks {
    let mut checks = Vec::new();
    let (below, period) = oracle::doubling_period_frequency(1, 7);
    for k in [1usize, 10, 333] {
        let u = BernoulliUniverse::new("1/7".parse().map_err(err)?, 3 * k).map_err(err)?;
        let f = u.frequency(&TickPredicate::Below(0.5)).ratio();
        checks.push(Check::new(
            format!("x0 = 1/7 over {k} periods: frequency 2/3"),
            f == Ratio::new(2, 3) && f == Ratio::new(below, period),
            f.to_string(),
        ));
    }
    for eps in [0.05, 0.1] {
        let mut last = f64::INFINITY;
        for n in [100, 1000, 10_000] {
            let est = lln_deviation_measure(0.5, n, eps, 4000, 7).map_err(err)?;
            checks.push(Check::at_most(format!("ε = {eps}, n = {n}: measure ≤ Chebyshev + 3σ"), est.measure, est.chebyshev_bound + 3.0 * est.std_error));
            let decreasing = if last > 0.0 { est.measure < last } else { est.measure == 0.0 };
            checks.push(Check::new(format!("ε = {eps}, n = {n}: measure decreases"), decreasing, format!("{} after {last}", est.measure)));
            last = est.measure;
        }
    }
    Ok(checks)
}

pub(super) fn cross_section() -> Checks {
    const SAMPLES: usize = 1_000_000;
    let potential = PotentialSpec::CentralRepulsivePower { k: 1.0, n: 12.0 };
    let opts = ScatteringOptions::default();
    let table = deflection_function(&potential, 1.0, &opts).map_err(err)?;
    let s_max = opts.s_max;
    let edges: Vec<f64> = (0..=14).map(|k| 0.2 + 0.2 * k as f64).collect();
    let counts = oracle::deflection_histogram(&table, SAMPLES, 48, &edges);
    let res = cross_section_from_table(table.clone(), &|_| 1.0, &[]);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, &count) in counts.iter().enumerate() {
        let (lo, hi) = (edges[k], edges[k + 1]);
        let sigma = |th: f64| table.invert(th).map_or(0.0, |(s, dsdt)| s / th.sin() * dsdt);
        // dN/dΩ = σ·N/(π s_max²) for a uniform beam.
        let p = oracle::simpson(|th| sigma(th) * 2.0 * PI * th.sin(), lo, hi, 400) / (PI * s_max * s_max);
        let expected = p * SAMPLES as f64;
        let sd = (SAMPLES as f64 * p * (1.0 - p)).sqrt();
        worst = worst.max((count as f64 - expected).abs() / sd);
    }
    checks.push(Check::at_most("max |count − N∫σ dΩ| / σ_stat over 14 bins", worst, 3.0));
    checks.push(Check::close("unit beam has unit intensity", res.intensity, 1.0, 1e-9));

    let rho_i = |s: f64| (-s * s).exp();
    let rho_s = |th: f64| table.invert(th).map_or(0.0, |(s, dsdt)| rho_i(s) * s / th.sin() * dsdt);
    let z0 = -10.0;
    let em = reverse_emission_density(&potential, 1.0, &rho_s, z0, &opts).map_err(err)?;
    let worst_rt = em
        .table
        .s
        .iter()
        .filter(|&&s| s > 0.05 && s < 0.95 * s_max)
        .map(|&s| (em.incident(s) / rho_i(s) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("reverse emission density round trip, relative", worst_rt, 0.02));
    Ok(checks)
}

pub(super) fn semiclassical() -> Checks {
    let xs: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.37).collect();
    let (mut worst_kq, mut worst_closed, mut worst_int): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (m, t) in [(1.0, 2.0), (0.3, 0.7), (5.0, 40.0)] {
        let c = semiclassical_density_compare(m, t, &xs);
        let rho = oracle::free_density(m, t);
        for k in 0..xs.len() {
            worst_kq = worst_kq.max((c.rho_c[k] - c.rho_q[k]).abs() / c.rho_q[k]);
            worst_closed = worst_closed.max((c.rho_c[k] - rho).abs() / rho);
            worst_int = worst_int.max(c.interference[k].abs() / c.rho_q[k]);
        }
    }
    let toy = two_source_toy(1.0, 1.5, [-0.8, 1.1], &(-200..=200).map(|k| k as f64 * 0.05).collect::<Vec<_>>());
    let worst_toy = toy.direct.iter().zip(&toy.from_actions).map(|(d, f)| (d - f).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("ρ_C vs |K|², relative", worst_kq, 1e-10),
        Check::at_most("ρ_C vs |m/t|/2π, relative", worst_closed, 1e-10),
        Check::at_most("free interference term, relative", worst_int, 1e-10),
        Check::at_most("two-source cross term, pointwise", worst_toy, 1e-8),
    ])
}

pub(super) fn ncdic() -> Checks {
    let free = NcdicConfig {
        mass: 1.0,
        potential: PotentialSpec::Zero,
        boxes: vec![(-2.0, -1.5), (-0.5, 0.25), (1.0, 2.0)],
        grid: GridSpec::new(1, 4096, 25.6, 1.0),
        sigmas: vec![0.1, 0.05],
        t_list: vec![0.2, 0.4],
        dt: 0.01,
    };
    let rep = ncdic_report(&free).map_err(err)?;
    let mut checks: Vec<Check> = rep
        .rows
        .iter()
        .map(|r| Check::close(format!("free ({}, {}]: π_Q = π_C", r.lo, r.hi), r.pi_q, r.pi_c, 0.02 * r.pi_c))
        .collect();
    let barrier = NcdicConfig {
        potential: PotentialSpec::SquareBarrier { v0: 0.5, a: 1.0 },
        boxes: vec![(0.2, 0.8), (1.0, 1.5)],
        grid: GridSpec::new(1, 8192, 256.0, 1.0),
        sigmas: vec![0.5, 0.3],
        t_list: vec![10.0, 20.0],
        ..free
    };
    let rep = ncdic_report(&barrier).map_err(err)?;
    let gap = &rep.rows[0];
    checks.push(Check::new("barrier gap box (0.2, 0.8]: μ_C = 0", gap.mu_c == 0.0, format!("{}", gap.mu_c)));
    checks.push(Check::new("barrier gap box (0.2, 0.8]: μ_Q > 0", gap.mu_q > 0.0, format!("regression value μ_Q = {:.6e}", gap.mu_q)));
    Ok(checks)
}

use std::f64::consts::PI;
use std::path::PathBuf;

use aml_core::classical::{
    barrier_flow, classical_cross_section, integrate_nbigbang, reverse_emission_density, solve_asymptotic_boundary_condition,
    IntegrationOptions, PotentialSpec, ScatteringOptions, SystemSpec,
};
use aml_core::geometry::{
    decade_estimates, estimate_asymptotic_velocity, GeometryError, IntervalBox, SampledTrajectory, TransformSpec, Vec3,
};
use aml_core::io::{
    read_file, read_state, read_trajectory, write_bigbang, write_box_masses, write_cross_section, write_decades, write_lln,
    write_measure, write_ncdic, write_quantum_run, write_state, IoError,
};
use aml_core::measures::{
    corrected_transfer, ncdic_report, pullback, quotient_measure, GroupActionSpec, MeasurableMap, NcdicConfig,
    PullbackOptions, QuantumEta, QuotientOptions, UniformMeasure,
};
use aml_core::probability::{
    lln_deviation_measure, sample_frequencies, BernoulliUniverse, InitialCondition, TickPredicate,
};
use aml_core::quantum::{
    aet_invariance_check, asymptotic_quantum_measure, evolve, sigma_ladder, AetOptions, GridSpec, PointSourceSpec,
    QuantumPotential,
};
use aml_core::suite::{run_suite, select, Group};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::run::{typed, Run};

type Result<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn interval(pair: [f64; 2]) -> Result<IntervalBox<f64>> {
    IntervalBox::interval(pair[0], pair[1]).map_err(|e| config_err(e.to_string()))
}

/// A box given either as `[lo, hi]` or as `{"lo": [...], "hi": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Interval([f64; 2]),
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl BoxSpec {
    fn build(&self) -> Result<IntervalBox<f64>> {
        match self {
            BoxSpec::Interval(p) => interval(*p),
            BoxSpec::Box { lo, hi } => IntervalBox::new(lo.clone(), hi.clone()).map_err(|e| config_err(e.to_string())),
        }
    }
}

fn boxes(specs: &[BoxSpec]) -> Result<Vec<IntervalBox<f64>>> {
    if specs.is_empty() {
        return Err(config_err("at least one box is required"));
    }
    specs.iter().map(BoxSpec::build).collect()
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

// asymvel

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymvelConfig {
    /// Built-in curve `1a`, `1b` or `1c`.
    #[serde(default)]
    pub example: Option<String>,
    /// Trajectory CSV with header `t,x,y,z`.
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default = "default_v")]
    pub v: [f64; 3],
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Exponent `ε` of the sublinear curve `v|t|^(1−ε) + x0`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_v() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn default_x0() -> [f64; 3] {
    [0.3, -0.2, 0.5]
}
fn default_omega() -> f64 {
    2.0
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-3
}

fn example_trajectory(cfg: &AsymvelConfig, name: &str) -> Result<SampledTrajectory<f64>> {
    let v = Vec3::from_array(cfg.v);
    let x0 = Vec3::from_array(cfg.x0);
    let w = cfg.omega;
    let traj = match name {
        "1a" => SampledTrajectory::geometric(1.0, cfg.t_final.unwrap_or(1e4), |t: f64| v * t + x0 * (w * t).sin()),
        "1b" => {
            if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
                return Err(config_err(format!("epsilon = {} must lie in (0, 1)", cfg.epsilon)));
            }
            let e = cfg.epsilon;
            SampledTrajectory::geometric(1.0, cfg.t_final.unwrap_or(1e6), |t: f64| v * t.abs().powf(1.0 - e) + x0)
        }
        "1c" => SampledTrajectory::geometric(1.0, cfg.t_final.unwrap_or(1e4), |t: f64| v * (t * (w * t).sin())),
        other => return Err(config_err(format!("unknown example {other:?} (expected 1a, 1b or 1c)"))),
    };
    traj.map_err(|e| config_err(e.to_string()))
}

pub fn asymvel(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: AsymvelConfig = typed(value)?;
    let traj = match (&cfg.example, &cfg.file) {
        (Some(name), None) => example_trajectory(&cfg, name)?,
        (None, Some(path)) => read_trajectory(read_file(path).map_err(CliError::input)?.as_slice()).map_err(CliError::input)?,
        _ => return Err(config_err("give exactly one of `example` and `file`")),
    };
    let mut run = Run::new("asymvel", out, &cfg, None)?;
    let est = estimate_asymptotic_velocity(&traj, cfg.tol)?;
    let rows = match decade_estimates(&traj, cfg.tol) {
        Ok(rows) => rows,
        Err(GeometryError::TooFewSamples(_)) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    run.emit("asymvel.csv", |w| write_decades(w, &rows))?;
    println!(
        "ω = ({:.9}, {:.9}, {:.9}), residual {:.3e}, T = {}",
        est.value.x, est.value.y, est.value.z, est.residual, est.final_time
    );
    run.finish()?;
    Ok(())
}

// quantum-measure

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumMeasureConfig {
    pub grid: GridSpec,
    pub source: PointSourceSpec,
    /// Optional σ ladder; the limit is then extrapolated to σ → 0.
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub potential: Option<QuantumPotential>,
    pub boxes: Vec<BoxSpec>,
    pub t_list: Vec<f64>,
    pub dt: f64,
    /// Also dump the evolved source at the last time as `state.bin`.
    #[serde(default)]
    pub save_state: bool,
}

pub fn quantum_measure(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: QuantumMeasureConfig = typed(value)?;
    let bx = boxes(&cfg.boxes)?;
    let pot = cfg.potential.clone().unwrap_or_else(QuantumPotential::free);
    let mut run = Run::new("quantum-measure", out, &cfg, None)?;
    let dim = cfg.grid.dim;
    let limit = if cfg.sigmas.is_empty() {
        let r = asymptotic_quantum_measure::<f64>(&cfg.grid, &cfg.source, &pot, &bx, &cfg.t_list, cfg.dt)?;
        run.emit("measure.csv", |w| write_quantum_run(w, &r))?;
        r.limit
    } else {
        let ladder = sigma_ladder::<f64>(&cfg.grid, &cfg.source.x0, &cfg.sigmas, &pot, &bx, &cfg.t_list, cfg.dt)?;
        for (k, r) in ladder.runs.iter().enumerate() {
            run.emit(&format!("measure_sigma{k}.csv"), |w| write_quantum_run(w, r))?;
        }
        ladder.extrapolated
    };
    run.emit("limit.csv", |w| write_box_masses(w, dim, bx.iter().zip(limit.iter().copied())))?;
    for (b, m) in bx.iter().zip(&limit) {
        println!("{:?} .. {:?}: {m:.9}", b.lo(), b.hi());
    }
    if cfg.save_state {
        let t = *cfg.t_list.last().ok_or_else(|| config_err("t_list is empty"))?;
        let state = evolve(&cfg.source.state::<f64>(&cfg.grid)?, &pot, t, cfg.dt)?;
        run.emit("state.bin", |w| write_state(w, &state))?;
    }
    run.finish()?;
    Ok(())
}

// suite

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Groups to run; all when empty.
    #[serde(default)]
    pub only: Vec<Group>,
    /// Saved wavefunctions that must load cleanly before the battery starts.
    #[serde(default)]
    pub states: Vec<PathBuf>,
}

pub fn suite(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: SuiteConfig = typed(value)?;
    for p in &cfg.states {
        let bytes = read_file(p).map_err(CliError::input)?;
        let st = read_state(bytes.as_slice()).map_err(|e| match e {
            IoError::Format(msg) => CliError::Config(format!("input: {}: {msg}", p.display())),
            other => CliError::input(other),
        })?;
        println!("state {}: n = {}, t = {}, norm = {:.12}", p.display(), st.n(), st.t(), st.norm());
    }
    let mut run = Run::new("suite", out, &cfg, None)?;
    let summary = run_suite(&select(&cfg.only), |o| println!("{}", o.line()));
    run.json("suite_summary.json", &summary)?;
    run.finish()?;
    println!("{} passed, {} failed", summary.passed, summary.failed);
    if summary.all_passed() {
        Ok(())
    } else {
        let ids: Vec<String> = summary.outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
        Err(CliError::Acceptance(format!("criteria {} failed", ids.join(", "))))
    }
}

// classical-sim

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocitySampler {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSimConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub velocities: Vec<[f64; 3]>,
    #[serde(default)]
    pub sampler: Option<VelocitySampler>,
    #[serde(default)]
    pub options: IntegrationOptions,
    #[serde(default = "default_sim_tol")]
    pub tol: f64,
}

fn default_sim_tol() -> f64 {
    1e-2
}

pub fn classical_sim(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: ClassicalSimConfig = typed(value)?;
    let velocities: Vec<Vec3<f64>> = match (&cfg.sampler, cfg.velocities.is_empty()) {
        (None, false) => cfg.velocities.iter().map(|v| Vec3::from_array(*v)).collect(),
        (Some(s), true) => {
            if s.count != cfg.system.n() || (0..3).any(|k| !(s.lo[k] <= s.hi[k])) {
                return Err(config_err("sampler needs lo ≤ hi and one velocity per particle"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            (0..s.count)
                .map(|_| Vec3::new(rng.random_range(s.lo[0]..=s.hi[0]), rng.random_range(s.lo[1]..=s.hi[1]), rng.random_range(s.lo[2]..=s.hi[2])))
                .collect()
        }
        _ => return Err(config_err("give exactly one of `velocities` and `sampler`")),
    };
    let seed = cfg.sampler.as_ref().map(|s| s.seed);
    let mut run = Run::new("classical-sim", out, &cfg, seed)?;
    let res = integrate_nbigbang::<f64>(&cfg.system, &velocities, &cfg.options)?;
    let written = write_bigbang(run.dir(), "trajectory", &res.bigbang).map_err(CliError::output)?;
    run.record(written);
    let mut table = csv_line(&["particle", "omega_x", "omega_y", "omega_z", "residual"].map(String::from));
    for (i, tr) in res.bigbang.trajectories().iter().enumerate() {
        let est = estimate_asymptotic_velocity(tr, cfg.tol)?;
        table += &csv_line(&[i.to_string(), est.value.x.to_string(), est.value.y.to_string(), est.value.z.to_string(), est.residual.to_string()]);
    }
    run.write("asymptotic.csv", table.as_bytes())?;
    println!("{} trajectories, relative energy drift {:.3e}", velocities.len(), res.energy_drift);
    run.finish()?;
    Ok(())
}

// boundary-solve

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySolveConfig {
    pub mass: f64,
    pub v0: f64,
    pub a: f64,
    /// Asymptotic velocities to solve for.
    pub velocities: Vec<f64>,
    pub t_list: Vec<f64>,
}

pub fn boundary_solve(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: BoundarySolveConfig = typed(value)?;
    if cfg.velocities.is_empty() {
        return Err(config_err("no velocities given"));
    }
    let mut run = Run::new("boundary-solve", out, &cfg, None)?;
    let mut per_t = csv_line(&["v", "t", "v_i"].map(String::from));
    let mut limits = csv_line(&["v", "v_i_limit", "degenerate", "decay_exponent"].map(String::from));
    for &v in &cfg.velocities {
        let s = solve_asymptotic_boundary_condition(cfg.mass, cfg.v0, cfg.a, v, &cfg.t_list)?;
        for (t, u) in s.t_list.iter().zip(&s.v_i_of_t) {
            per_t += &csv_line(&[v.to_string(), t.to_string(), u.to_string()]);
        }
        let exponent = s.decay_exponent.map_or(String::new(), |e| e.to_string());
        limits += &csv_line(&[v.to_string(), s.v_i_limit.to_string(), s.degenerate.to_string(), exponent]);
        println!("v = {v}: v_I → {:.12}{}", s.v_i_limit, if s.degenerate { " (inside the gap)" } else { "" });
    }
    run.write("boundary.csv", per_t.as_bytes())?;
    run.write("boundary_limits.csv", limits.as_bytes())?;
    run.finish()?;
    Ok(())
}

// cross-section

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Beam {
    #[default]
    Uniform,
    /// `ρ_I(s) = exp(−s²/w²)`.
    Gaussian { width: f64 },
}

impl Beam {
    fn density(self, s: f64) -> f64 {
        match self {
            Beam::Uniform => 1.0,
            Beam::Gaussian { width } => (-(s / width).powi(2)).exp(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionConfig {
    pub potential: PotentialSpec,
    pub energy: f64,
    #[serde(default)]
    pub options: ScatteringOptions,
    pub theta: ThetaGrid,
    #[serde(default)]
    pub beam: Beam,
    /// Distance of the emitting source; when set, also invert for the emission density.
    #[serde(default)]
    pub reverse_z0: Option<f64>,
}

pub fn cross_section(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: CrossSectionConfig = typed(value)?;
    let g = &cfg.theta;
    if g.count < 2 || !(0.0 < g.from && g.from < g.to && g.to <= PI) {
        return Err(config_err("theta grid needs 0 < from < to ≤ π and count ≥ 2"));
    }
    let grid: Vec<f64> = (0..g.count).map(|k| g.from + (g.to - g.from) * k as f64 / (g.count - 1) as f64).collect();
    let beam = cfg.beam;
    let mut run = Run::new("cross-section", out, &cfg, None)?;
    let res = classical_cross_section(&cfg.potential, cfg.energy, &|s| beam.density(s), &grid, &cfg.options)?;
    run.emit("cross_section.csv", |w| write_cross_section(w, &res))?;
    if let Some(z0) = cfg.reverse_z0 {
        let table = &res.table;
        let rho_s = |th: f64| table.invert(th).map_or(0.0, |(s, dsdt)| beam.density(s) * s / th.sin() * dsdt);
        let em = reverse_emission_density(&cfg.potential, cfg.energy, &rho_s, z0, &cfg.options)?;
        let mut text = csv_line(&["theta", "rho_e"].map(String::from));
        for (th, r) in em.theta.iter().zip(&em.rho_e) {
            text += &csv_line(&[th.to_string(), r.to_string()]);
        }
        run.write("emission.csv", text.as_bytes())?;
    }
    let (lo, hi) = res.table.theta_range();
    println!("Θ ranges over [{lo:.6}, {hi:.6}], beam intensity {:.6}", res.intensity);
    run.finish()?;
    Ok(())
}

// transfer

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub mass: f64,
    pub v0: f64,
    pub a: f64,
    pub grid: GridSpec,
    pub sigma: f64,
    pub dt: f64,
    /// Initial-velocity interval `Δ_I`.
    pub interval: [f64; 2],
    pub t_list: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct TransferSummary {
    corrected: f64,
    limit_error: f64,
    naive_pullback: f64,
    naive_invalid_boxes: Vec<usize>,
}

pub fn transfer(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: TransferConfig = typed(value)?;
    let delta = interval(cfg.interval)?;
    let mut grid = cfg.grid.clone();
    grid.mass = cfg.mass;
    let pot = QuantumPotential::central(PotentialSpec::SquareBarrier { v0: cfg.v0, a: cfg.a });
    let mut run = Run::new("transfer", out, &cfg, None)?;
    let mut eta = QuantumEta::new(&grid, &PointSourceSpec::at_origin(1, cfg.sigma), &pot, cfg.dt)?;
    let rep = corrected_transfer(&mut eta, &barrier_flow(cfg.mass, cfg.v0, cfg.a), &delta, &cfg.t_list)?;
    let lenient = PullbackOptions { strict: false, ..Default::default() };
    let naive = pullback(&eta.cone_measure(), &MeasurableMap::barrier_omega_v(cfg.mass, cfg.v0), &[delta], &lenient)?;
    let mut text = csv_line(&["box_lo", "box_hi", "t", "mass"].map(String::from));
    for ((t, (lo, hi)), m) in rep.t.iter().zip(&rep.region).zip(&rep.mass) {
        text += &csv_line(&[lo.to_string(), hi.to_string(), t.to_string(), m.to_string()]);
    }
    run.write("transfer.csv", text.as_bytes())?;
    let summary = TransferSummary {
        corrected: rep.limit,
        limit_error: rep.limit_error,
        naive_pullback: naive.measure.total(),
        naive_invalid_boxes: naive.invalid,
    };
    run.json("transfer.json", &summary)?;
    println!("corrected {:.9} (±{:.2e}), naive pullback {:.9}", summary.corrected, summary.limit_error, summary.naive_pullback);
    run.finish()?;
    Ok(())
}

// quotient

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanarMeasure {
    Lebesgue,
    Uniform { density: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientConfig {
    pub measure: PlanarMeasure,
    pub action: GroupActionSpec,
    /// Transversal intervals.
    pub base: Vec<[f64; 2]>,
    #[serde(default)]
    pub options: QuotientOptions,
}

pub fn quotient(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: QuotientConfig = typed(value)?;
    let mu = match cfg.measure {
        PlanarMeasure::Lebesgue => UniformMeasure::lebesgue(2),
        PlanarMeasure::Uniform { density } if density >= 0.0 => UniformMeasure { dim: 2, density },
        PlanarMeasure::Uniform { density } => return Err(config_err(format!("density {density} is negative"))),
    };
    let base = cfg.base.iter().map(|p| interval(*p)).collect::<Result<Vec<_>>>()?;
    let mut run = Run::new("quotient", out, &cfg, None)?;
    let res = quotient_measure(&mu, &cfg.action, &base, &cfg.options)?;
    run.emit("quotient.csv", |w| write_measure(w, &res.measure))?;
    println!(
        "quotient mass {:.15}, window deviation {:.2e}, transversal deviation {:.2e}",
        res.measure.total(),
        res.window_deviation,
        res.transversal_deviation
    );
    run.finish()?;
    Ok(())
}

// bernoulli

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnConfig {
    pub p: f64,
    pub epsilons: Vec<f64>,
    pub ns: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypicalConfig {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliConfig {
    /// `p/q`, a terminating decimal, or `random:SEED`.
    pub initial: String,
    pub horizon: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub typical: Option<TypicalConfig>,
    #[serde(default)]
    pub lln: Option<LlnConfig>,
}

fn default_threshold() -> f64 {
    0.5
}

pub fn bernoulli(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: BernoulliConfig = typed(value)?;
    let initial: InitialCondition = cfg.initial.parse()?;
    let seed = match &initial {
        InitialCondition::Random { seed } => Some(*seed),
        _ => cfg.lln.as_ref().map(|l| l.seed).or(cfg.typical.as_ref().map(|t| t.seed)),
    };
    let universe = BernoulliUniverse::new(initial, cfg.horizon)?;
    let pred = TickPredicate::Below(cfg.threshold);
    let mut run = Run::new("bernoulli", out, &cfg, seed)?;
    let mut orbit = csv_line(&["tick", "state", "value"].map(String::from));
    for p in universe.orbit_points() {
        orbit += &csv_line(&[p.tick.to_string(), p.state, p.value.to_string()]);
    }
    run.write("orbit.csv", orbit.as_bytes())?;
    let f = universe.frequency(&pred);
    let mut freq = csv_line(&["horizon", "hits", "ticks", "frequency"].map(String::from));
    freq += &csv_line(&[cfg.horizon.to_string(), f.hits.to_string(), f.ticks.to_string(), f.ratio().to_string()]);
    println!("frequency of state < {}: {} ≈ {:.9}", cfg.threshold, f.ratio(), f.value());
    if let Some(t) = &cfg.typical {
        let s = sample_frequencies(cfg.horizon, t.samples, t.seed, &pred)?;
        println!("typical orbits: mean frequency {:.6} ± {:.2e}", s.mean, s.std_error);
        run.json("typical.json", &s)?;
    }
    run.write("frequency.csv", freq.as_bytes())?;
    if let Some(l) = &cfg.lln {
        let mut rows = Vec::new();
        for &eps in &l.epsilons {
            for &n in &l.ns {
                rows.push(lln_deviation_measure(l.p, n, eps, l.samples, l.seed)?);
            }
        }
        run.emit("deviation.csv", |w| write_lln(w, &rows))?;
    }
    run.finish()?;
    Ok(())
}

// ncdic

pub fn ncdic(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: NcdicConfig = typed(value)?;
    let mut run = Run::new("ncdic", out, &cfg, None)?;
    let rep = ncdic_report(&cfg)?;
    run.emit("ncdic.csv", |w| write_ncdic(w, &rep))?;
    run.json("ncdic.json", &rep)?;
    for r in &rep.rows {
        println!("({}, {}]: π_C {:.6}  π_Q {:.6}  μ_C {:.6}  μ_Q {:.6}  gap {:+.3e}", r.lo, r.hi, r.pi_c, r.pi_q, r.mu_c, r.mu_q, r.gap);
    }
    run.finish()?;
    Ok(())
}

// aet-check

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AetConfig {
    pub grid: GridSpec,
    pub source: PointSourceSpec,
    #[serde(default)]
    pub potential: Option<QuantumPotential>,
    pub transform: TransformSpec,
    pub interval: [f64; 2],
    pub eps: Vec<f64>,
    pub t_list: Vec<f64>,
    pub dt: f64,
    #[serde(default)]
    pub options: AetOptions,
}

pub fn aet_check(value: Value, out: &std::path::Path) -> Result<()> {
    let cfg: AetConfig = typed(value)?;
    cfg.transform.validate()?;
    let i = interval(cfg.interval)?;
    let pot = cfg.potential.clone().unwrap_or_else(QuantumPotential::free);
    let mut run = Run::new("aet-check", out, &cfg, None)?;
    let f = cfg.transform.build::<f64>();
    let rep = aet_invariance_check::<f64>(&cfg.grid, &cfg.source, &pot, &f, &i, &cfg.eps, &cfg.t_list, cfg.dt, &cfg.options)?;
    let mut text = csv_line(&["t", "region_lo", "region_hi", "mass_transformed", "mass_plain"].map(String::from));
    for k in 0..rep.t.len() {
        let (lo, hi) = rep.region[k];
        text += &csv_line(&[rep.t[k], lo, hi, rep.mass_transformed[k], rep.mass_plain[k]].map(|v| v.to_string()));
    }
    run.write("aet.csv", text.as_bytes())?;
    let mut sandwich = csv_line(&["epsilon", "t", "lower", "upper", "holds"].map(String::from));
    for row in &rep.sandwich {
        for k in 0..rep.t.len() {
            sandwich += &csv_line(&[
                row.eps.to_string(),
                rep.t[k].to_string(),
                row.lower[k].to_string(),
                row.upper[k].to_string(),
                row.holds[k].to_string(),
            ]);
        }
        println!("ε = {}: sandwich holds from t0 = {:?}", row.eps, row.t0);
    }
    run.write("aet_sandwich.csv", sandwich.as_bytes())?;
    run.json("aet.json", &rep)?;
    println!("final relative gap {:.3e}, violation: {}", rep.final_relative_gap, rep.violation);
    run.finish()?;
    Ok(())
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use error::CliError;
use run::{load_config, set_path};

#[derive(Parser)]
#[command(name = "aml", version, about = "Asymptotic measures of classical and quantum scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set grid.n=8192`. The value is parsed as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic velocity of a sampled or built-in trajectory.
    Asymvel {
        #[command(flatten)]
        common: Common,
        /// Built-in curve: 1a, 1b or 1c.
        #[arg(long)]
        example: Option<String>,
        /// Velocity of the built-in curve, as `x,y,z`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Option<Vec<f64>>,
        /// Trajectory CSV (`t,x,y,z`).
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Asymptotic quantum measure of velocity boxes.
    QuantumMeasure {
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance battery.
    Suite {
        #[command(flatten)]
        common: Common,
        /// Restrict to these groups (comma separated or repeated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Saved state files to validate first.
        #[arg(long)]
        state: Vec<PathBuf>,
    },
    /// Integrate an N-particle big bang.
    ClassicalSim {
        #[command(flatten)]
        common: Common,
    },
    /// Initial velocities reaching given asymptotic velocities past a square barrier.
    BoundarySolve {
        #[command(flatten)]
        common: Common,
    },
    /// Classical differential cross-section, optionally inverted for an emission density.
    CrossSection {
        #[command(flatten)]
        common: Common,
    },
    /// Quantum measure transferred through the barrier flow.
    Transfer {
        #[command(flatten)]
        common: Common,
    },
    /// Quotient of a planar measure by a translation group.
    Quotient {
        #[command(flatten)]
        common: Common,
    },
    /// Doubling-map orbits, frequencies and large-deviation measures.
    Bernoulli {
        #[command(flatten)]
        common: Common,
    },
    /// Classical versus quantum initial and asymptotic measures.
    Ncdic {
        #[command(flatten)]
        common: Common,
    },
    /// Invariance of the quantum measure under a causal transform.
    AetCheck {
        #[command(flatten)]
        common: Common,
    },
}

type Handler = fn(Value, &Path) -> Result<(), CliError>;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("AML_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("AML_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Resource(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (common, handler, extra): (Common, Handler, Vec<(&str, Value)>) = match cli.command {
        Command::Asymvel { common, example, v, file } => {
            let mut extra = Vec::new();
            if let Some(e) = example {
                extra.push(("example", Value::from(e)));
            }
            if let Some(v) = v {
                if v.len() != 3 {
                    return Err(CliError::Config(format!("--v needs three components, got {}", v.len())));
                }
                extra.push(("v", Value::from(v)));
            }
            if let Some(f) = file {
                extra.push(("file", Value::from(f.to_string_lossy().into_owned())));
            }
            (common, commands::asymvel, extra)
        }
        Command::Suite { common, only, state } => {
            let mut extra = Vec::new();
            if !only.is_empty() {
                extra.push(("only", Value::from(only)));
            }
            if !state.is_empty() {
                let paths: Vec<String> = state.iter().map(|p| p.to_string_lossy().into_owned()).collect();
                extra.push(("states", Value::from(paths)));
            }
            (common, commands::suite, extra)
        }
        Command::QuantumMeasure { common } => (common, commands::quantum_measure, vec![]),
        Command::ClassicalSim { common } => (common, commands::classical_sim, vec![]),
        Command::BoundarySolve { common } => (common, commands::boundary_solve, vec![]),
        Command::CrossSection { common } => (common, commands::cross_section, vec![]),
        Command::Transfer { common } => (common, commands::transfer, vec![]),
        Command::Quotient { common } => (common, commands::quotient, vec![]),
        Command::Bernoulli { common } => (common, commands::bernoulli, vec![]),
        Command::Ncdic { common } => (common, commands::ncdic, vec![]),
        Command::AetCheck { common } => (common, commands::aet_check, vec![]),
    };
    let mut value = load_config(common.config.as_deref(), &common.overrides)?;
    for (key, v) in extra {
        set_path(&mut value, key, v)?;
    }
    handler(value, &common.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

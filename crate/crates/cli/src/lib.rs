//! Command-line runner for the packaged experiments.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 configuration error,
//! 3 divergence or non-finite values during a run.

pub mod config;
pub mod emit;

use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::Parser;
use smdpen_core::benchmarks::{run_experiment, ExperimentKind};
use smdpen_core::Error;

use crate::config::{ConfigError, RunConfig, Target, VariantFlag};

#[derive(Debug, Parser)]
#[command(
    name = "smdpen",
    version,
    about = "Stochastic mirror descent on exact penalty functions"
)]
pub struct Cli {
    /// Experiment to run: trajectories, rosenbrock, penalty-demo-1d, beta-vs-l1, regression or all.
    pub experiment: Option<Target>,
    /// TOML file with run settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration budget per run.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Norm exponent of the penalty, in (1, 100].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Initial penalty parameter.
    #[arg(long)]
    pub p0: Option<f64>,
    /// Penalty multiplier, in (1, 10].
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Leading constant of the step schedule.
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Standard deviation of the gradient-oracle noise.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Record every n-th iterate in the trace.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Output directory [default: results].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the dual-averaging variant.
    #[arg(long)]
    pub dual_averaging: bool,
    /// Also run the long regression rows and the largest Rosenbrock case.
    #[arg(long)]
    pub include_large: bool,
}

impl Cli {
    fn flag_config(&self) -> RunConfig {
        RunConfig {
            experiment: self.experiment,
            iterations: self.iters,
            seed: self.seed,
            gamma0: self.gamma0,
            beta: self.beta,
            p0: self.p0,
            kappa: self.kappa,
            p_max: self.p_max,
            sigma: self.sigma,
            record_every: self.record_every,
            out: self.out.clone(),
            variant: self.dual_averaging.then_some(VariantFlag::DualAveraging),
            include_large: self.include_large.then_some(true),
        }
    }

    /// Defaults, then the file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let config = RunConfig::default().merged(file).merged(self.flag_config());
        config.validate()?;
        config.target()?;
        Ok(config)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{experiment}: {error}")]
    Solver {
        experiment: ExperimentKind,
        error: Error,
    },
    #[error("{experiment}: cannot write outputs: {error}")]
    Io {
        experiment: ExperimentKind,
        error: std::io::Error,
    },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io { .. } => 1,
            Failure::Solver { error, .. } => match error {
                Error::InvalidConfig(_)
                | Error::UnsupportedBeta { .. }
                | Error::InvalidDomain(_)
                | Error::UnknownExperiment(_) => 2,
                Error::Diverged { .. }
                | Error::NonFinitePoint { .. }
                | Error::NonFiniteConstraint { .. } => 3,
                _ => 1,
            },
        }
    }
}

/// Runs one experiment and writes its outputs. A run that stops early still
/// has its partial outputs written before the failure is returned.
pub fn run_one(kind: ExperimentKind, config: &RunConfig) -> Result<String, Failure> {
    let output = run_experiment(kind, &config.overrides()).map_err(|error| Failure::Solver {
        experiment: kind,
        error,
    })?;
    let dir = emit::emit_experiment(&config.out_dir(), kind, &output, config).map_err(|error| {
        Failure::Io {
            experiment: kind,
            error,
        }
    })?;
    if let Some(error) = output.failure {
        return Err(Failure::Solver {
            experiment: kind,
            error,
        });
    }
    let mut text = format!(
        "{kind}: {} run(s) in {:.2}s -> {}\n",
        output.runs.len(),
        output.wall_clock_secs,
        dir.display()
    );
    for (key, value) in &output.metrics {
        text.push_str(&format!("  {key} = {value}\n"));
    }
    Ok(text)
}

/// Resolves the configuration, runs the requested experiments (in parallel
/// for `all`) and returns the process exit code.
pub fn execute(cli: &Cli) -> ExitCode {
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let kinds = config
        .target()
        .expect("resolved config names a target")
        .experiments();
    let results: Vec<Result<String, Failure>> = thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let config = &config;
                s.spawn(move || run_one(kind, config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let mut code = 0;
    for result in results {
        match result {
            Ok(text) => print!("{text}"),
            Err(f) => {
                eprintln!("error: {f}");
                code = code.max(f.exit_code());
            }
        }
    }
    ExitCode::from(code)
}

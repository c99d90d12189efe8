//! Command-line front end for the `ldp-core` discretization toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Format, Overrides};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "ldp", version, about = "Discretized large deviations of empirical measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the partition sequence of mu and write per-depth cell masses.
    Discretize(Common),
    /// Entropy ladder H(nu^m|mu^m) as CSV (m,H_m).
    Entropy(Common),
    /// Bounded-Lipschitz distance between the finite measures nu and mu.
    BlDist(Common),
    /// Monte Carlo decay rate of a BL ball against its entropy infimum.
    Rate(Common),
    /// Run the named check suite; exits 1 if any check fails.
    Verify(Common),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum partition depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Sample size n, replacing n_list.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output file (directory for discretize); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, depth: self.depth, samples: self.samples, reps: self.reps, out: self.out.clone(), format: self.format }
    }

    fn load(&self, fallback: Option<&str>) -> CliResult<ExperimentConfig> {
        let base = match (&self.config, fallback) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(text)) => ExperimentConfig::parse(text)?,
            (None, None) => ExperimentConfig::default(),
        };
        Ok(base.apply(&self.overrides()))
    }
}

/// Runs one subcommand; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> CliResult<bool> {
    let (common, fallback) = match &cli.command {
        Command::Verify(c) => (c, Some(commands::verify::DEFAULT_CONFIG)),
        Command::Discretize(c) | Command::Entropy(c) | Command::BlDist(c) | Command::Rate(c) => (c, None),
    };
    let cfg = common.load(fallback)?;
    let (text, ok) = match &cli.command {
        Command::Discretize(_) => {
            let summary = commands::discretize::run(&cfg)?;
            print!("{summary}");
            return Ok(true);
        }
        Command::Entropy(_) => (commands::entropy::run(&cfg)?, true),
        Command::BlDist(_) => (commands::bl::run(&cfg)?, true),
        Command::Rate(_) => (commands::rate::run(&cfg)?, true),
        Command::Verify(_) => commands::verify::run(&cfg)?,
    };
    output::emit(cfg.out.as_deref(), &text)?;
    Ok(ok)
}

//! Command-line front end: configuration, experiment orchestration and
//! output.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{placement_pmf, validate_checks, BlockerMetric, Check};
pub use config::{load_config, load_config_with, EchoEntry, OutputFormat, Overrides, RunConfig, ValidateConfig};
pub use output::{render, sig6, Cell, Table};

use crate::blockage::AntennaPlacement;
use crate::error::{Error, Result};
use crate::exec::{with_threads, Execution};
use crate::sim::LanePlacement;

#[derive(Debug, Parser)]
#[command(name = "v2v-blockage", version, about = "Vehicle blockage model and Monte Carlo oracle for mmWave V2V links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; omitted keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Monte Carlo trials per grid point (0 skips the simulation).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Link distances in metres, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dtr: Option<Vec<f64>>,
    /// Traffic densities in vehicles per metre, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// SNR thresholds in dB, comma separated.
    #[arg(long = "gamma-th", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma_th: Option<Vec<f64>>,
    /// Antenna mounting and/or lane rule; may be repeated.
    #[arg(long, global = true, value_enum)]
    pub placement: Vec<Placement>,
    /// Worker threads (0 uses every core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Blockage probability versus distance.
    BlockageProb,
    /// Mean number of blockers versus distance.
    AvgBlockers,
    /// SNR mixture components and density.
    SnrDist,
    /// Service probability over distance, density and threshold.
    ServiceProb,
    /// Density of the TxV-RxV distance.
    DistancePdf,
    /// Analytic-vs-simulation consistency checks; exits 1 on any failure.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BlockageProb => "blockage-prob",
            Command::AvgBlockers => "avg-blockers",
            Command::SnrDist => "snr-dist",
            Command::ServiceProb => "service-prob",
            Command::DistancePdf => "distance-pdf",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Placement {
    Rooftop,
    Bumper,
    SameLane,
    NeighborLane,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        let mut o = Overrides {
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            distances: self.dtr.clone(),
            densities: self.rho.clone(),
            thresholds_db: self.gamma_th.clone(),
            ..Overrides::default()
        };
        for p in &self.placement {
            match p {
                Placement::Rooftop => o.antenna = Some(AntennaPlacement::Rooftop),
                Placement::Bumper => o.antenna = Some(AntennaPlacement::Bumper),
                Placement::SameLane => o.lane_placement = Some(LanePlacement::SameLane),
                Placement::NeighborLane => o.lane_placement = Some(LanePlacement::NeighborLane),
            }
        }
        o
    }
}

/// Builds the table for `command`; the flag is false when `validate` saw a
/// tolerance violation.
pub fn run(command: Command, cfg: &RunConfig, exec: Execution) -> Result<(Table, bool)> {
    match command {
        Command::BlockageProb => Ok((commands::blockers(cfg, BlockerMetric::Probability, exec)?, true)),
        Command::AvgBlockers => Ok((commands::blockers(cfg, BlockerMetric::Mean, exec)?, true)),
        Command::SnrDist => Ok((commands::snr_dist(cfg, exec)?, true)),
        Command::ServiceProb => Ok((commands::service_prob(cfg, exec)?, true)),
        Command::DistancePdf => Ok((commands::distance_density(cfg, exec)?, true)),
        Command::Validate => commands::validate(cfg, exec),
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = load_config_with(cli.config.as_deref(), &cli.overrides())?;
    let (table, ok) = with_threads(cli.threads, || run(cli.command, &cfg, Execution::Parallel))?;
    output::emit(cli.command.name(), &cfg, &table)?;
    Ok(ok)
}

/// Parses `args` and runs; returns the process exit status: 0 success,
/// 1 tolerance failure, 2 configuration or I/O error.
pub fn exit_status<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{}: one or more checks exceeded tolerance", cli.command.name());
            1
        }
        Err(e @ (Error::Config(_) | Error::Io(_) | Error::Domain(_))) => {
            eprintln!("error: {e}");
            2
        }
    }
}

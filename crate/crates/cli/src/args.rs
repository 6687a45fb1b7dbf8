//! Flag parsing and config-file merging.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdsi::{Direction, ExperimentConfig, Mode, RicianSpec, SystemGeometry};
use serde::Deserialize;

use crate::CliError;

pub const SEED_ENV: &str = "FDSIM_SEED";

#[derive(Debug, Parser)]
#[command(name = "fdsim", version, about = "Residual self-interference experiments for full-duplex MIMO nodes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the residual SI gain empirically and/or from its Gamma fit.
    Si(RunArgs),
    /// Print the closed-form moments and Gamma parameters.
    Moments(RunArgs),
    /// Sample per-radio SINR term breakdowns.
    Sinr(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Empirical,
    Theoretical,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Downlink,
    Uplink,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Downlink => Direction::Downlink,
            DirectionArg::Uplink => Direction::Uplink,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

/// Every flag is optional so that `--config` values can fill the gaps.
#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// Transmit antennas at the multi-antenna node.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub tx_antennas: Option<usize>,
    /// Receive antennas at the multi-antenna node.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub rx_antennas: Option<usize>,
    /// FD radios (streams) per cell.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub streams: Option<usize>,
    /// Number of cells.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub cells: Option<usize>,
    /// Mean of the residual SI channel entries.
    #[arg(long, conflicts_with_all = ["varpi", "omega"])]
    pub mu: Option<f64>,
    /// Standard deviation of the residual SI channel entries.
    #[arg(long, conflicts_with_all = ["varpi", "omega"])]
    pub nu: Option<f64>,
    /// Rician factor of the residual SI channel.
    #[arg(long)]
    pub varpi: Option<f64>,
    /// Fading attenuation (mean power) of the residual SI channel.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed; falls back to the FDSIM_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Receiver noise variance.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Write histograms with this many bins instead of raw samples.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with any of the above keys; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub modes: Vec<Mode>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub bins: Option<usize>,
    pub threads: Option<usize>,
}

fn load_config_file(path: &Path) -> Result<RunArgs, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))
}

fn rician_spec(source: &RunArgs) -> Result<RicianSpec, CliError> {
    let direct = source.mu.is_some() || source.nu.is_some();
    let factor = source.varpi.is_some() || source.omega.is_some();
    let spec = match (direct, factor) {
        (true, true) => {
            return Err(CliError::Usage(
                "--mu/--nu and --varpi/--omega are mutually exclusive".into(),
            ))
        }
        (false, true) => RicianSpec::from_factor(source.varpi.unwrap_or(0.0), source.omega.unwrap_or(1.0)),
        _ => RicianSpec::new(source.mu.unwrap_or(0.5), source.nu.unwrap_or(1.0)),
    };
    spec.map_err(|e| CliError::Usage(e.to_string()))
}

impl RunArgs {
    /// Fills unset flags from `--config`, then from built-in defaults.
    pub fn resolve(&self, default_mode: ModeArg, default_direction: DirectionArg) -> Result<RunManifest, CliError> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RunArgs::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                self.$field.clone().or(file.$field.clone())
            };
        }

        // The Rician pair is taken as a unit from whichever source names it.
        let flag_names_spec = self.mu.is_some() || self.nu.is_some() || self.varpi.is_some() || self.omega.is_some();
        let si_spec = rician_spec(if flag_names_spec { self } else { &file })?;

        let seed = match pick!(seed) {
            Some(seed) => seed,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?,
                Err(_) => 0,
            },
        };

        let geom = SystemGeometry {
            cells: pick!(cells).unwrap_or(1),
            streams: pick!(streams).unwrap_or(1),
            tx_antennas: pick!(tx_antennas).unwrap_or(16),
            rx_antennas: pick!(rx_antennas).unwrap_or(8),
        };
        let mode = pick!(mode).unwrap_or(default_mode);
        let modes = match mode {
            ModeArg::Empirical => vec![Mode::Empirical],
            ModeArg::Theoretical => vec![Mode::Theoretical],
            ModeArg::Both => vec![Mode::Empirical, Mode::Theoretical],
        };
        let config = ExperimentConfig {
            geom,
            si_spec,
            radio_si_spec: None,
            trials: pick!(trials).unwrap_or(1_000_000),
            seed,
            noise_power: pick!(noise).unwrap_or(1.0),
            mode: modes[0],
            direction: pick!(direction).unwrap_or(default_direction).into(),
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let bins = pick!(bins);
        if bins == Some(0) {
            return Err(CliError::Usage("--bins must be at least 1".into()));
        }
        let threads = pick!(threads);
        if threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(RunManifest {
            config,
            modes,
            output_dir: pick!(out).unwrap_or_else(|| PathBuf::from(".")),
            format: pick!(format).unwrap_or(Format::Csv),
            bins,
            threads,
        })
    }
}

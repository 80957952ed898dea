//! Experiment driver: argument parsing, config-file merging and the
//! subcommands that turn library calls into CSV/JSON reports.
//!
//! Every flag may also come from a JSON config file (`--config`); flags given
//! on the command line win. SNR is taken in dB and converted once.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::protocol::{db_to_linear, CastMode, ProtocolParams};

pub use commands::{ExactRow, Figure2Row, EXACT_SCHEMA, FIGURE2_SCHEMA};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("{0}")]
    Unattainable(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidArgs(_) => 2,
            CliError::Unattainable(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Unattained(m) => CliError::Unattainable(m),
            crate::Error::Io(m) => CliError::Io {
                path: "<output>".into(),
                message: m,
            },
            other => CliError::InvalidArgs(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coop-outage", version, about = "Outage analysis of two-phase cooperative unicast/multicast")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase rates, effective rate and fraction of capacity.
    Rates(Flags),
    /// Single- or multi-antenna capacity and the converse outage floor.
    Capacity(Flags),
    /// Monte Carlo outage estimates.
    Simulate(Flags),
    /// Exact outage probabilities.
    Exact(Flags),
    /// Exact values, Chernoff bounds and approximations.
    Bounds(Flags),
    /// Outage versus network size: simulation, exact, bounds, approximations.
    Figure2(Flags),
    /// Scaling exponent over an (alpha, beta) grid and its upper envelope.
    Figure3(Flags),
    /// Network size needed for a target outage, unicast vs multicast.
    RequiredK(Flags),
    /// Asymptotic scaling exponent for one (alpha, beta).
    Exponent(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum ModeArg {
    #[serde(alias = "unicast")]
    Uc,
    #[serde(alias = "multicast")]
    Mc,
}

impl From<ModeArg> for CastMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Uc => CastMode::Unicast,
            ModeArg::Mc => CastMode::Multicast,
        }
    }
}

/// Flags shared by every subcommand. Each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON file supplying any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Target fraction of phase-1 decoders, in (0, 1].
    #[arg(long, conflicts_with = "g_threshold")]
    pub alpha: Option<f64>,
    /// Phase-1 gain threshold G(alpha); alternative to --alpha.
    #[arg(long = "g")]
    #[serde(alias = "g")]
    pub g_threshold: Option<f64>,
    /// Phase-2 back-off, in (0, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// SNR P/N0 in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Network size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated network sizes.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Envelope output path for figure3.
    #[arg(long)]
    pub envelope_out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Target outage probability.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated antenna counts per node; the last is the destination.
    #[arg(long, value_delimiter = ',')]
    pub antennas: Option<Vec<u32>>,
    /// Transmission rate in bits per channel use.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Grid points per axis for figure3.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Rate-fraction bins for the figure3 envelope.
    #[arg(long)]
    pub bins: Option<usize>,
}

macro_rules! overlay {
    ($cli:expr, $file:expr, $($field:ident),+) => {
        $( if $cli.$field.is_none() { $cli.$field = $file.$field.clone(); } )+
    };
}

impl Flags {
    /// Fills every unset flag from the config file, if one was given.
    pub fn merged(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let file: Flags = serde_json::from_str(&text)
            .map_err(|e| CliError::InvalidArgs(format!("{}: {e}", path.display())))?;
        if self.alpha.is_some() || self.g_threshold.is_some() {
            // a command-line choice of alpha or G replaces both from the file
        } else {
            self.alpha = file.alpha;
            self.g_threshold = file.g_threshold;
        }
        overlay!(
            self, file, beta, snr_db, k, k_list, trials, seed, workers, mode, out, envelope_out, format,
            eps, antennas, rate, grid, bins
        );
        Ok(self)
    }

    pub fn snr(&self) -> f64 {
        db_to_linear(self.snr_db.unwrap_or(0.0))
    }

    /// Protocol parameters; with neither `--alpha` nor `--g`, uses `G = 1/2`.
    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        let beta = self.beta.unwrap_or(0.5);
        let p = match (self.alpha, self.g_threshold) {
            (Some(_), Some(_)) => {
                return Err(CliError::InvalidArgs("give exactly one of --alpha and --g".into()))
            }
            (Some(a), None) => ProtocolParams::new(a, beta, self.snr()),
            (None, g) => ProtocolParams::from_threshold(g.unwrap_or(0.5), beta, self.snr()),
        };
        Ok(p?)
    }

    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// Runs one parsed command, writing to `--out` or to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    use Command::*;
    match cli.command {
        Rates(f) => commands::rates(&f.merged()?, stdout),
        Capacity(f) => commands::capacity_cmd(&f.merged()?, stdout),
        Simulate(f) => commands::simulate(&f.merged()?, stdout),
        Exact(f) => commands::exact(&f.merged()?, stdout),
        Bounds(f) => commands::bounds(&f.merged()?, stdout),
        Figure2(f) => commands::figure2(&f.merged()?, stdout),
        Figure3(f) => commands::figure3(&f.merged()?, stdout),
        RequiredK(f) => commands::required_k(&f.merged()?, stdout),
        Exponent(f) => commands::exponent(&f.merged()?, stdout),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::InvalidArgs(e.to_string()))?;
    run(cli, stdout)
}

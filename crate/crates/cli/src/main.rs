//! `nullsteer` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nullsteer", version, about = "Null-steering beamforming experiments for bistatic backscatter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Scenario JSON document; the built-in ceiling-array room when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Master seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid and trial evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Override the BD position.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
    pub bd: Option<Vec<f64>>,
    /// Override the carrier frequency in Hz.
    #[arg(long)]
    pub fc_hz: Option<f64>,
    /// Override the per-emitter power in dBm.
    #[arg(long, allow_negative_numbers = true)]
    pub p_dbm: Option<f64>,
    /// Relative CSI estimation error std.
    #[arg(long, default_value_t = 0.0)]
    pub csi_error: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute weights and metrics for one beamformer.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "azf")]
        beamformer: String,
        /// Per-antenna phase error std applied to the weights, degrees.
        #[arg(long, default_value_t = 0.0)]
        phase_noise_deg: f64,
    },
    /// Scan the direct-link power over a plane with fixed weights.
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "azf")]
        beamformer: String,
        #[arg(long, default_value_t = nullsteer::scenario::DEFAULT_GRID_STEP_M)]
        step: f64,
        #[arg(long, num_args = 2, value_names = ["W", "H"])]
        extent: Option<Vec<f64>>,
        /// Lower-left grid corner; centred on the first reader when omitted.
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        origin: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        phase_noise_deg: f64,
        /// Heatmap CSV on the same grid to compare against (dB ratio).
        #[arg(long)]
        diff: Option<PathBuf>,
    },
    /// Sweep the number of active emitters.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![10usize, 20, 30, 40, 42])]
        k: Vec<usize>,
        /// `strongest` or `weakest`; both when omitted.
        #[arg(long)]
        order: Option<String>,
        #[arg(long, value_delimiter = ',', default_values_t = vec!["po-mrt".to_string(), "azf".to_string()])]
        beamformer: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        phase_noise_deg: f64,
    },
    /// Monte Carlo suppression under per-antenna phase errors.
    PhaseNoise {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 2.0, 5.0, 10.0])]
        phase_noise_deg: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(cli))
}

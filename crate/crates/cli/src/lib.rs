//! Command-line front end for odd-even HHG studies.
//!
//! Every subcommand reads a JSON config in laboratory units, runs the
//! physics from `oddeven`, and writes CSV (authoritative), JSON reports and
//! optional SVG plots into the output directory.

pub mod collapse;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ODDEVEN_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) | Self::Io(_) => 1,
        }
    }
}

impl From<oddeven::Error> for CliError {
    fn from(e: oddeven::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "oddeven", version, about = "Odd-even harmonic generation and THz waveform sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (default: the config's output_dir, then $ODDEVEN_OUT, then ./oddeven-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG line plots.
    #[arg(long)]
    pub svg: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state: binary checkpoint and energy report.
    Groundstate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// One harmonic spectrum.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Hold the THz field at its value at the probe centre.
        #[arg(long)]
        quasi_static: bool,
        /// Skip the TDSE and transform a pure cosine at this order.
        #[arg(long, value_name = "ORDER")]
        synthetic: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Even-to-odd ratio over a swept variable.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Use the analytic law instead of the TDSE.
        #[arg(long)]
        synthetic: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Several scans interpolated onto a common gamma grid.
    Collapse {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        synthetic: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Classical return trajectories and the coefficient C.
    Orbits {
        /// Probe config, needed for --harmonic.
        #[arg(long)]
        config: Option<PathBuf>,
        /// The maximum-energy trajectory (default).
        #[arg(long)]
        cutoff: bool,
        /// Return energy in units of Up.
        #[arg(long, conflicts_with = "harmonic")]
        energy: Option<f64>,
        /// Harmonic order; the return energy is `N w0 - Ip`.
        #[arg(long)]
        harmonic: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Pump-probe delay scan and THz waveform reconstruction.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        quasi_static: bool,
        /// Use the analytic forward model instead of the TDSE.
        #[arg(long)]
        synthetic: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("oddeven: {e}");
            e.exit_code()
        }
    }
}

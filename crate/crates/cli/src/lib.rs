//! Command-line front end for `lossless-core`.
//!
//! Every command computes its results first and writes files once at the
//! end, so outputs do not depend on the thread count. Exit codes: 0 success,
//! 1 I/O, parse or invalid input, 2 model-class violation, 3 numerical
//! failure.

pub mod commands;
pub mod formats;
pub mod manifest;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use lossless_core::{Error, ErrorClass};

pub use commands::{execute, run, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::ModelClass => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self.exit_code() {
            1 => "input",
            2 => "model",
            _ => "numerical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerChoice {
    H2Structured,
    HinfStatic,
    H2Riccati,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    H2,
    Hinf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "lossless", version, about = "Performance limits of lossless systems and swing-equation grids")]
pub struct Cli {
    /// Tolerance for certification and H-infinity norms.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Machine-readable stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Find the storage certificate P of a state-space model.
    Certify {
        model: PathBuf,
        /// Also write the report, including P, to this file.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// H2 and H-infinity limits of a state-space model or network.
    Limits { model: PathBuf },
    /// Design an optimal controller and compare its norm with the limit.
    Synthesize {
        model: PathBuf,
        #[arg(long, value_enum)]
        controller: ControllerChoice,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// H2 and H-infinity norms of a plant closed with a controller file.
    ClosedLoopNorms { model: PathBuf, controller: PathBuf },
    /// Generate a clustered test network.
    GenNetwork {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ensemble configuration JSON; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        buses: Option<usize>,
        /// Use the fixed cluster sizes of the averaged ensemble.
        #[arg(long)]
        fixed_sizes: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Per-bus closed-loop gain matrix of a network or an ensemble.
    Gains {
        /// Network JSON; omit with --ensemble.
        network: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "h2")]
        metric: MetricArg,
        /// Analyze the cluster-lumped network instead.
        #[arg(long)]
        lumped: bool,
        /// Average over this many generated networks.
        #[arg(long)]
        ensemble: Option<usize>,
        /// First seed of the ensemble.
        #[arg(long)]
        seed: Option<u64>,
        /// Ensemble configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the controller paired with the metric.
        #[arg(long, value_enum)]
        controller: Option<ControllerChoice>,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Also write a heatmap here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

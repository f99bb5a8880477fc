mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED_CHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_EXPLODED: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;

/// An error carrying the process exit code it should produce.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Coded {
        code: EXIT_USAGE,
        message: message.into(),
    }
    .into()
}

#[derive(Parser, Debug)]
#[command(
    name = "qhkit",
    version,
    about = "QHM/QHAdam optimizer toolkit: runs, sweeps, conversions and oracles"
)]
pub struct Cli {
    /// Flat key=value config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Random seed (overrides the config file).
    #[arg(long, global = true, env = "QHKIT_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output file for CSV results (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Config override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one optimizer and write its trajectory CSV.
    Run,
    /// Sweep (nu, beta) over a grid and write one row per cell and seed.
    Sweep,
    /// Map parameters between optimizer families.
    #[command(allow_negative_numbers = true)]
    Convert(Box<ConvertArgs>),
    /// Tight (QH)Adam update bound, with the previously claimed bound.
    Bound(BoundArgs),
    /// Empirical variance ratio of a QHWMA against rho(nu, beta).
    Variance(VarianceArgs),
    /// Check that QHM and another family follow the same trajectory.
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug, Default)]
pub struct ConvertArgs {
    /// Source family (qhm, pid, snv, accsgd, anpid, tso) or a single-family
    /// quantity (aggmo-lr, unnormalized-lr, nag-xi).
    pub from: String,
    /// Target family.
    pub to: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub kp: Option<f64>,
    #[arg(long)]
    pub ki: Option<f64>,
    #[arg(long)]
    pub kd: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated AggMo betas.
    #[arg(long)]
    pub betas: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 1.0)]
    pub nu1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu2: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    /// Finite horizon; the limit is used when absent.
    #[arg(long)]
    pub t: Option<usize>,
    /// Emit `nu2,bound` CSV over nu2 = 0.01, 0.02, ..., 1.
    #[arg(long)]
    pub sweep_nu2: bool,
}

#[derive(Args, Debug)]
pub struct VarianceArgs {
    #[arg(long)]
    pub nu: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct OracleArgs {
    /// Must be `qhm`.
    pub a: String,
    /// sgd, momentum, nag, pid, snv, accsgd, aggmo, tso or momentum-nubeta.
    pub b: String,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.7)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: u64,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(c) = e.downcast_ref::<Coded>() {
        return c.code;
    }
    if e.is::<config::ConfigError>() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<qhkit::Error>() {
        Some(qhkit::Error::Infeasible { .. }) | Some(qhkit::Error::Degenerate(_)) => EXIT_INFEASIBLE,
        Some(_) => EXIT_USAGE,
        None => EXIT_FAILED_CHECK,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

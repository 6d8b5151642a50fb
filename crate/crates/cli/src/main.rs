//! `mixreg`: bound evaluation, single paths, Monte Carlo experiments and
//! replay verification.
//!
//! Exit codes: 0 ok, 1 precondition failure, 2 usage or parse error,
//! 3 a bound was violated, 4 numerics could not be verified.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mixreg", version, about = "Mixture wealth processes and regret bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// RNG seed (falls back to the config file, then MIXREG_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Ville level in (0, 1), default 0.05
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Window parameter in (0, 1/4], default 0.1
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Robbins prior constant, at least 6.6e.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// `robbins`, `robbins:C` or `gaussian:SIGMA0_SQ`.
    #[arg(long, global = true)]
    pub prior: Option<String>,
    /// Directory for machine-readable artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Absolute slack for bound comparisons, default 1e-9
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Worker threads; results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat `key = value` file; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the pathwise and conditional bounds at one state.
    Bound {
        #[arg(long = "S", allow_hyphen_values = true)]
        s: f64,
        #[arg(long = "V", allow_hyphen_values = true)]
        v: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Log-wealth and regret of the prior at one state.
    Wealth {
        #[arg(long = "S", allow_hyphen_values = true)]
        s: f64,
        #[arg(long = "V", allow_hyphen_values = true)]
        v: f64,
        #[arg(long)]
        json: bool,
    },
    /// Simulate one path and write its per-step trace.
    Simulate {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "T")]
        t: Option<u64>,
    },
    /// Monte Carlo run: Ville frequency, bound checks, CS coverage.
    Coverage {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "n-paths", alias = "paths")]
        n_paths: Option<u64>,
        #[arg(long = "T")]
        t: Option<u64>,
    },
    /// Long-horizon LIL and eventual-regret diagnostics.
    Lil {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "n-paths", alias = "paths")]
        n_paths: Option<u64>,
        #[arg(long = "T")]
        t: Option<u64>,
        #[arg(long = "checkpoints-per-decade")]
        checkpoints_per_decade: Option<u32>,
    },
    /// Check the pathwise bound along a replay file of `dS dV` lines.
    VerifyReplay { file: PathBuf },
    /// Run the invariant suite at reduced scale.
    Selftest {
        /// Multiply the sample sizes.
        #[arg(long, default_value_t = 1)]
        scale: u64,
    },
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        CliError { code: 1, msg: msg.into() }
    }
}

impl From<mixreg::Error> for CliError {
    fn from(e: mixreg::Error) -> Self {
        use mixreg::Error as E;
        let code = match e {
            E::Config(_)
            | E::UnknownGenerator(_)
            | E::Parse { .. }
            | E::Json(_)
            | E::InvalidAlpha(_)
            | E::InvalidRho { .. }
            | E::InvalidPrior(_)
            | E::InvalidQuadrature(_) => 2,
            _ => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

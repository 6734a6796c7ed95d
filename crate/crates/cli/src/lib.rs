//! The `decoherence` command line: coefficient and concurrence tracks as
//! CSV, the Fock-space oracle check, and parameter sweeps.

pub mod commands;
pub mod config;
pub mod csv;
mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use decoherence_core::EcsKind;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "decoherence", version, about = "Non-Markovian decoherence of two coupled oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (`-` for stdout) or, for `sweep`, output directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for `verify` and `sweep`.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Coupling strength of the spectral density.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Spectral cutoff frequency.
    #[arg(long, global = true)]
    pub omega_c: Option<f64>,
    /// Spectral exponent n.
    #[arg(long, global = true)]
    pub ohmicity: Option<f64>,
    /// Inter-oscillator coupling.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Phase branch, +1 or -1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Real part of the coherent amplitude.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Imaginary part of the coherent amplitude.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_imag: Option<f64>,
    /// psi_plus, psi_minus, phi_plus or phi_minus.
    #[arg(long, global = true)]
    pub kind: Option<EcsKind>,
    /// Final time.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Grid step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay rates and frequency shifts with their Markov limits.
    Coeffs,
    /// Concurrence with and without the Markov approximation.
    Concurrence {
        /// Add columns for the other state of the same family.
        #[arg(long)]
        companion: bool,
    },
    /// Compare the closed-form state against the integrated master equation.
    Verify {
        /// Negate the decay coefficients (negative control; expected to fail).
        #[arg(long)]
        negate_gamma: bool,
        /// Photon-number cutoff per mode.
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Run the configured parameter sweep.
    Sweep,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            kappa: self.kappa,
            lambda: self.lambda,
            eta: self.eta,
            omega_c: self.omega_c,
            n: self.ohmicity,
            t_max: self.t_max,
            dt: self.dt,
            kind: self.kind,
            alpha: self.alpha,
            alpha_imag: self.alpha_imag,
        }
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    if workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let n = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Executes a parsed command line, writing progress and reports to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mut config = RunConfig::load(cli.common.config.as_deref(), &cli.common.overrides())?;
    let out_path = cli.common.out.clone();
    match &cli.command {
        Command::Coeffs => {
            let path = out_path.unwrap_or_else(|| config.outputs.coeffs.clone());
            commands::cmd_coeffs(&config, &path, out)
        }
        Command::Concurrence { companion } => {
            config.outputs.companion |= companion;
            let path = out_path.unwrap_or_else(|| config.outputs.concurrence.clone());
            commands::cmd_concurrence(&config, &path, out)
        }
        Command::Verify { negate_gamma, cutoff } => {
            if let Some(n) = cutoff {
                config.verify.cutoff = *n;
            }
            commands::cmd_verify(&config, *negate_gamma, &pool(cli.common.workers)?, out)
        }
        Command::Sweep => {
            let dir = out_path.unwrap_or_else(|| config.outputs.sweep_dir.clone());
            commands::cmd_sweep(&config, &dir, &pool(cli.common.workers)?, out)
        }
    }
}

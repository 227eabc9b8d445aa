//! `fluxqed` command line: a JSON run config in, CSV/JSON artifacts out.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fluxqed", version, about = "Fluxonium-cavity simulator")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`).
    #[arg(long, global = true, env = "FLUXQED_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long, global = true)]
    pub emit_plots: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Qubit transition frequencies against flux.
    Spectrum,
    /// χ, K and higher-order Kerr against flux.
    Chikerr,
    /// Cavity Ramsey fringes and the fitted Kerr.
    Ramsey,
    /// Husimi Q function of a storage state.
    Qfunc,
    /// Wigner function, exact or simulated measurement.
    Wigner,
    /// Power Rabi on a photon-number peak.
    Rabi,
    /// SNAP state preparation with fidelities and error budget.
    Snap,
    /// Incoherent SNAP error against storage T1 and qubit dephasing.
    Errormap,
    /// Transmon Kerr bound and the literature check.
    Bound,
    /// Zero-Kerr fluxonium search or fixed-χ detuning sweep.
    Optimize,
    /// Regression checks against the reference devices.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Chikerr => "chikerr",
            Command::Ramsey => "ramsey",
            Command::Qfunc => "qfunc",
            Command::Wigner => "wigner",
            Command::Rabi => "rabi",
            Command::Snap => "snap",
            Command::Errormap => "errormap",
            Command::Bound => "bound",
            Command::Optimize => "optimize",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Verify(usize),
}

impl From<fluxqed::Error> for CliError {
    fn from(e: fluxqed::Error) -> Self {
        use fluxqed::Error::*;
        match e {
            InvalidParameter { .. } | Truncation(_) | DimensionCap { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("config error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
                CliError::Verify(n) => eprintln!("{n} check(s) failed"),
            }
            ExitCode::from(e.code())
        }
    }
}

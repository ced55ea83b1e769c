//! `misinfo`: transmission-time tables, network simulations, mean-field
//! runs, parameter estimation and validation suites.

mod cmd;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use misinfo_core::doublespend::{ConfirmationDepth, MinerPower};

#[derive(Parser)]
#[command(name = "misinfo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the transmission-time PMF and CDF.
    Distribution(cmd::distribution::DistributionArgs),
    /// Run replicated network simulations.
    Simulate(cmd::simulate::SimulateArgs),
    /// Integrate the mean-field model.
    Meanfield(cmd::meanfield::MeanfieldArgs),
    /// Fit SIR parameters to an infected-count series.
    Estimate(cmd::estimate::EstimateArgs),
    /// Write a synthetic infected-count series.
    Synthesize(cmd::synthesize::SynthesizeArgs),
    /// Run an oracle comparison and report pass/fail.
    Validate(cmd::validate::ValidateArgs),
}

/// Miner rates and confirmation depth.
#[derive(Args, Clone, Debug)]
pub struct ChainArgs {
    /// Confirmation depth.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Dishonest mining rate (with --mu-h).
    #[arg(long, requires = "mu_h", conflicts_with = "p")]
    pub mu_d: Option<f64>,
    /// Honest mining rate (with --mu-d).
    #[arg(long, requires = "mu_d")]
    pub mu_h: Option<f64>,
    /// Dishonest share of the total rate.
    #[arg(long)]
    pub p: Option<f64>,
    /// Total mining rate when --p is used.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
}

impl ChainArgs {
    pub fn power(&self) -> Result<MinerPower> {
        Ok(match (self.mu_d, self.mu_h) {
            (Some(d), Some(h)) => MinerPower::new(d, h)?,
            _ => MinerPower::from_share(self.p.unwrap_or(0.3), self.mu)?,
        })
    }

    pub fn depth(&self) -> Result<ConfirmationDepth> {
        Ok(ConfirmationDepth::new(self.k)?)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmfFlag {
    Literal,
    Increment,
}

/// A validation suite ran and at least one check failed.
#[derive(Debug)]
pub struct ValidationFailed(pub String);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "validation failed: {}", self.0)
    }
}

impl std::error::Error for ValidationFailed {}

pub type OutPath = Option<PathBuf>;

/// Output piped into a reader that quit early, e.g. `head`.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    let pipe = |io: &std::io::Error| io.kind() == std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(pipe)
            || c.downcast_ref::<csv::Error>()
                .is_some_and(|ce| matches!(ce.kind(), csv::ErrorKind::Io(io) if pipe(io)))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Distribution(a) => cmd::distribution::run(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Meanfield(a) => cmd::meanfield::run(a),
        Command::Estimate(a) => cmd::estimate::run(a),
        Command::Synthesize(a) => cmd::synthesize::run(a),
        Command::Validate(a) => cmd::validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ValidationFailed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

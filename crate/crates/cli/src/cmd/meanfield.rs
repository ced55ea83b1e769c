use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use misinfo_core::doublespend::{TransmissionTimeDistribution, DEFAULT_TOL};
use misinfo_core::meanfield::{
    blockchain_sir_run, classical_sir_run, DelayModel, MeanFieldParams, PmfConvention,
    TransmissionKernel, WindowConvention,
};

use crate::output;
use crate::{ChainArgs, PmfFlag};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Classical,
    Blockchain,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowFlag {
    Inclusive,
    Disjoint,
}

/// Defaults are the posterior means fitted to the reference outbreak.
#[derive(Args, Debug)]
pub struct MeanfieldArgs {
    #[arg(long, value_enum, default_value_t = Mode::Classical)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.00359)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.02166)]
    pub alpha: f64,
    #[arg(long, default_value_t = 115.67961)]
    pub s0: f64,
    #[arg(long, default_value_t = 4.48387)]
    pub i0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 500)]
    pub horizon: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Block-time units per step.
    #[arg(long, default_value_t = 15)]
    pub l: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Replace the transmission-time law by all mass at zero delay.
    #[arg(long)]
    pub delta_pmf: bool,
    #[arg(long, value_enum, default_value_t = PmfFlag::Literal)]
    pub pmf: PmfFlag,
    #[arg(long, value_enum, default_value_t = WindowFlag::Inclusive)]
    pub windows: WindowFlag,
    /// Output CSV file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: MeanfieldArgs) -> Result<()> {
    let params = MeanFieldParams {
        beta: args.beta,
        alpha: args.alpha,
        s0: args.s0,
        i0: args.i0,
        r0: args.r0,
    };
    let series = match args.mode {
        Mode::Classical => {
            if args.delta_pmf {
                bail!("--delta-pmf applies to --mode blockchain");
            }
            classical_sir_run(&params, args.horizon)?
        }
        Mode::Blockchain => {
            let kernel = if args.delta_pmf {
                TransmissionKernel::dirac_at_zero()
            } else {
                let ttd = TransmissionTimeDistribution::new(
                    args.chain.depth()?,
                    args.chain.power()?,
                    args.tol,
                )?;
                let conv = match args.pmf {
                    PmfFlag::Literal => PmfConvention::Literal,
                    PmfFlag::Increment => PmfConvention::CdfIncrement,
                };
                TransmissionKernel::from_distribution(&ttd, conv)
            };
            let delay = DelayModel {
                kernel,
                time_scale: args.l,
                windows: match args.windows {
                    WindowFlag::Inclusive => WindowConvention::Inclusive,
                    WindowFlag::Disjoint => WindowConvention::Disjoint,
                },
            };
            blockchain_sir_run(&params, &delay, args.horizon)?
        }
    };
    output::write_trajectory(output::sink(args.out.as_deref())?, &series, &[])
}

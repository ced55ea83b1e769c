use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use misinfo_core::estimation::{synthesize, ParamVector};
use misinfo_core::rng::{substream, Stream};

use crate::output::{self, num};

/// Defaults are the posterior means fitted to the reference outbreak.
#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[arg(long, default_value_t = 0.00359)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.02166)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4.48387)]
    pub i0: f64,
    #[arg(long, default_value_t = 115.67961)]
    pub s0: f64,
    #[arg(long, default_value_t = 14.87384)]
    pub sigma: f64,
    /// Last time index T.
    #[arg(long, default_value_t = 87)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: SynthesizeArgs) -> Result<()> {
    let params = ParamVector {
        beta: args.beta,
        alpha: args.alpha,
        i0: args.i0,
        s0: args.s0,
        sigma: args.sigma,
    };
    let data = synthesize(
        &mut substream(args.seed, Stream::Noise),
        &params,
        args.horizon,
    )?;
    let mut w = csv::Writer::from_writer(output::sink(args.out.as_deref())?);
    w.write_record(["t", "count"])?;
    for (t, v) in data.values().iter().enumerate() {
        w.write_record([t.to_string(), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use misinfo_core::doublespend::{TransmissionTimeDistribution, DEFAULT_TOL};
use serde_json::json;

use crate::output::{self, num};
use crate::{ChainArgs, PmfFlag};

#[derive(Args, Debug)]
pub struct DistributionArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Last block time to tabulate; by default the table runs until the CDF
    /// is within 2*tol of the success probability.
    #[arg(long)]
    pub s_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Which quantity fills the pmf column.
    #[arg(long, value_enum, default_value_t = PmfFlag::Literal)]
    pub pmf: PmfFlag,
    /// Directory for distribution.csv and distribution.json. Without it the
    /// table goes to stdout and the JSON line to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: DistributionArgs) -> Result<()> {
    let depth = args.chain.depth()?;
    let power = args.chain.power()?;
    let ttd = match args.s_max {
        Some(s) => TransmissionTimeDistribution::with_grid(depth, power, args.tol, s)?,
        None => TransmissionTimeDistribution::new(depth, power, args.tol)?,
    };
    let pmf = match args.pmf {
        PmfFlag::Literal => ttd.literal_pmf(),
        PmfFlag::Increment => ttd.increment_pmf(),
    };
    let summary = json!({
        "k": depth.get(),
        "mu_d": power.dishonest(),
        "mu_h": power.honest(),
        "s_max": ttd.s_max(),
        "success_probability": ttd.success_probability(),
    });

    let csv_path = args.out.as_ref().map(|d| d.join("distribution.csv"));
    if let Some(dir) = &args.out {
        output::create_dir(dir)?;
    }
    let mut w = csv::Writer::from_writer(output::sink(csv_path.as_deref())?);
    w.write_record(["s", "pmf", "cdf"])?;
    for (s, (p, c)) in pmf.iter().zip(ttd.cdf_grid()).enumerate() {
        w.write_record([s.to_string(), num(*p), num(*c)])?;
    }
    w.flush()?;
    match &args.out {
        Some(dir) => output::write_json(&dir.join("distribution.json"), &summary)?,
        None => {
            let mut err = std::io::stderr().lock();
            writeln!(err, "{summary}")?;
        }
    }
    Ok(())
}

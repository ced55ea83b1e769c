use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use misinfo_core::estimation::{
    metropolis_hastings, posterior_summary, ChainConfig, ObservedSeries, PARAM_NAMES,
};
use misinfo_core::rng::{substream, Stream};
use serde_json::json;

use crate::output::{self, json_num, num};

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// CSV with header `t,count` (one row per step starting at t = 0) or
    /// `timestamp` (one row per event).
    #[arg(long)]
    pub data: PathBuf,
    /// Window width for timestamp input.
    #[arg(long, default_value_t = 1.0)]
    pub bin_width: f64,
    /// Centered 3-point moving average before fitting.
    #[arg(long)]
    pub smooth: bool,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.75)]
    pub burn_in: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Keep the initial proposal scales during burn-in.
    #[arg(long)]
    pub no_adapt: bool,
    /// Directory for chain.csv and summary.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Reads either supported layout; errors name the offending line.
pub fn read_series(path: &Path, bin_width: f64) -> Result<ObservedSeries> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_lowercase).collect();
    let layout = match headers.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["t", "count"] => Layout::Counts,
        ["timestamp"] => Layout::Timestamps,
        _ => bail!(
            "line 1: expected header `t,count` or `timestamp`, found `{}`",
            headers.join(",")
        ),
    };
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| anyhow!("{e}"))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or_default();
            raw.parse::<f64>()
                .map_err(|_| anyhow!("line {line}: `{raw}` is not a number"))
        };
        match layout {
            Layout::Counts => {
                let t = field(0)?;
                if t != values.len() as f64 {
                    bail!("line {line}: expected t = {}, found {t}", values.len());
                }
                let c = field(1)?;
                if !(c >= 0.0 && c.is_finite()) {
                    bail!("line {line}: count {c} must be finite and >= 0");
                }
                values.push(c);
            }
            Layout::Timestamps => {
                let ts = field(0)?;
                if !ts.is_finite() {
                    bail!("line {line}: timestamp must be finite");
                }
                values.push(ts);
            }
        }
    }
    Ok(match layout {
        Layout::Counts => ObservedSeries::new(values, 1.0)?,
        Layout::Timestamps => ObservedSeries::from_timestamps(&values, bin_width)?,
    })
}

enum Layout {
    Counts,
    Timestamps,
}

pub fn run(args: EstimateArgs) -> Result<()> {
    let mut data = read_series(&args.data, args.bin_width)?;
    if args.smooth {
        data = data.smoothed();
    }
    let cfg = ChainConfig {
        iterations: args.iterations,
        burn_in_fraction: args.burn_in,
        adapt: !args.no_adapt,
        thin: args.thin,
        ..ChainConfig::default()
    };
    let chain = metropolis_hastings(&mut substream(args.seed, Stream::Chain), &data, &cfg)?;
    let summary = posterior_summary(&chain)?;

    output::create_dir(&args.out)?;
    let mut w = csv::Writer::from_writer(output::create(&args.out.join("chain.csv"))?);
    let mut header = vec!["sample"];
    header.extend(PARAM_NAMES);
    w.write_record(&header)?;
    for (n, p) in chain.samples.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(p.to_array().map(num));
        w.write_record(&row)?;
    }
    w.flush()?;

    let params: Vec<_> = summary
        .iter()
        .map(|s| json!({"name": s.name, "p05": s.p05, "mean": s.mean, "p95": s.p95}))
        .collect();
    let report = json!({
        "data": args.data.file_name().map(|f| f.to_string_lossy().into_owned()),
        "horizon": data.horizon(),
        "max_count": data.max(),
        "smoothed": args.smooth,
        "seed": args.seed,
        "iterations": chain.iterations,
        "burn_in_fraction": chain.burn_in_fraction,
        "retained": chain.samples.len(),
        "acceptance_rate": json_num(chain.acceptance_rate),
        "final_scales": chain.final_scales.map(json_num).to_vec(),
        "parameters": params,
    });
    output::write_json(&args.out.join("summary.json"), &report)
}

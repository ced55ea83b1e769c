use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use misinfo_core::abm::Trajectory;
use misinfo_core::metrics::{mean_and_stderr, paired_less_test, reproduction_number, MetricSeries};
use misinfo_core::network::CommunityGraph;
use misinfo_core::scenario::Scenario;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config;
use crate::output::{self, json_num, opt};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockchainFlag {
    On,
    Off,
    Both,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario file (TOML); defaults to the three-community scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, value_enum, default_value_t = BlockchainFlag::Both)]
    pub blockchain: BlockchainFlag,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Truncation tolerance of the transmission-time table.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fixed graph as `i j` lines (0-based); requires --labels.
    #[arg(long, requires = "labels")]
    pub edges: Option<PathBuf>,
    /// Node labels as `i c` lines (1-based communities).
    #[arg(long, requires = "edges")]
    pub labels: Option<PathBuf>,
    /// Also write each replicate's graph.
    #[arg(long)]
    pub write_graphs: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Blockchain,
    Baseline,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Blockchain => "blockchain",
            Mode::Baseline => "baseline",
        }
    }
}

struct RunSummary {
    peak: f64,
    mean_lambda: Option<f64>,
    community_r0: Vec<f64>,
    community_attack: Vec<f64>,
    json: Value,
}

fn summarize(traj: &Trajectory, sizes: &[usize]) -> Result<RunSummary> {
    let agg = MetricSeries::compute(&traj.aggregate)?;
    let mut community_r0 = Vec::new();
    let mut community_attack = Vec::new();
    let mut communities = Vec::new();
    for (c, &size) in traj.communities.iter().zip(sizes) {
        let m = MetricSeries::compute(c)?;
        let last = c.len() - 1;
        let attack = (c.i[last] + c.r[last]) / size as f64;
        community_r0.push(reproduction_number(c)?);
        community_attack.push(attack);
        communities.push(json!({
            "t_star": m.t_star,
            "r0": json_num(m.r0),
            "peak_infected": c.peak_infected(),
            "ever_infected_fraction": attack,
            "mean_lambda": m.mean_lambda().map_or(Value::Null, json_num),
        }));
    }
    let peak = traj.aggregate.peak_infected();
    Ok(RunSummary {
        peak,
        mean_lambda: agg.mean_lambda(),
        community_r0,
        community_attack,
        json: json!({
            "final_step": traj.final_step(),
            "peak_infected": peak,
            "t_star": agg.t_star,
            "r0": json_num(agg.r0),
            "mean_lambda": agg.mean_lambda().map_or(Value::Null, json_num),
            "communities": communities,
        }),
    })
}

fn write_metrics_csv(path: PathBuf, traj: &Trajectory) -> Result<()> {
    let m = MetricSeries::compute(&traj.aggregate)?;
    let mut w = csv::Writer::from_writer(output::create(&path)?);
    w.write_record(["t", "beta_emp", "alpha_emp", "lambda"])?;
    for t in 0..m.lambda.len() {
        w.write_record([
            t.to_string(),
            opt(m.beta_emp[t]),
            opt(m.alpha_emp[t]),
            opt(m.lambda[t]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn load_graph(edges: &PathBuf, labels: &PathBuf) -> Result<CommunityGraph> {
    let open = |p: &PathBuf| -> Result<BufReader<File>> {
        Ok(BufReader::new(
            File::open(p).with_context(|| format!("reading {}", p.display()))?,
        ))
    };
    Ok(CommunityGraph::read(open(labels)?, open(edges)?)?)
}

fn aggregate(runs: &[&RunSummary], m_count: usize) -> Value {
    let peaks: Vec<f64> = runs.iter().map(|r| r.peak).collect();
    let lambdas: Vec<f64> = runs.iter().filter_map(|r| r.mean_lambda).collect();
    let (pm, pse) = mean_and_stderr(&peaks);
    let (lm, lse) = mean_and_stderr(&lambdas);
    let communities: Vec<Value> = (0..m_count)
        .map(|m| {
            let r0: Vec<f64> = runs.iter().map(|r| r.community_r0[m]).collect();
            let finite: Vec<f64> = r0.iter().copied().filter(|v| v.is_finite()).collect();
            let (mean, se) = mean_and_stderr(&r0);
            let (fmean, fse) = mean_and_stderr(&finite);
            let saturated = runs
                .iter()
                .filter(|r| r.community_attack[m] >= 0.95)
                .count();
            json!({
                "community": m + 1,
                "r0_mean": json_num(mean),
                "r0_stderr": json_num(se),
                "r0_finite_mean": json_num(fmean),
                "r0_finite_stderr": json_num(fse),
                "r0_infinite_runs": r0.len() - finite.len(),
                "runs_95pct_infected": saturated,
            })
        })
        .collect();
    json!({
        "runs": runs.len(),
        "peak_infected_mean": json_num(pm),
        "peak_infected_stderr": json_num(pse),
        "mean_lambda_mean": json_num(lm),
        "mean_lambda_stderr": json_num(lse),
        "communities": communities,
    })
}

fn paired(block: &[&RunSummary], base: &[&RunSummary]) -> Value {
    let pb: Vec<f64> = block.iter().map(|r| r.peak).collect();
    let pn: Vec<f64> = base.iter().map(|r| r.peak).collect();
    let mut lb = Vec::new();
    let mut ln = Vec::new();
    for (b, n) in block.iter().zip(base) {
        if let (Some(x), Some(y)) = (b.mean_lambda, n.mean_lambda) {
            lb.push(x);
            ln.push(y);
        }
    }
    let test = |a: &[f64], b: &[f64]| -> Value {
        match paired_less_test(a, b) {
            Ok(t) => json!({
                "pairs": a.len(),
                "mean_difference": json_num(t.mean_difference),
                "stderr": json_num(t.stderr),
                "t": json_num(t.t),
                "p_value_one_sided": json_num(t.p_value),
            }),
            Err(e) => json!({ "pairs": a.len(), "error": e.to_string() }),
        }
    };
    json!({
        "peak_infected_blockchain_minus_baseline": test(&pb, &pn),
        "mean_lambda_blockchain_minus_baseline": test(&lb, &ln),
    })
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let mut cfg = config::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.simulation.rng_seed = seed;
    }
    if let Some(n) = args.replicates {
        cfg.simulation.replicates = n;
    }
    if let Some(tol) = args.tol {
        cfg.blockchain.tol = tol;
    }
    let out = config::output_dir(args.out.as_deref(), cfg.output_dir.as_deref());
    let scenario: Scenario = cfg.resolve()?;
    let fixed_graph = match (&args.edges, &args.labels) {
        (Some(e), Some(l)) => Some(load_graph(e, l)?),
        _ => None,
    };
    let modes: Vec<Mode> = match args.blockchain {
        BlockchainFlag::On => vec![Mode::Blockchain],
        BlockchainFlag::Off => vec![Mode::Baseline],
        BlockchainFlag::Both => vec![Mode::Blockchain, Mode::Baseline],
    };
    let ttd = if modes.contains(&Mode::Blockchain) {
        Some(scenario.transmission_time()?)
    } else {
        None
    };
    output::create_dir(&out)?;
    output::write_json(&out.join("config.json"), &serde_json::to_value(&cfg)?)?;

    let sizes = scenario.spec.sizes().to_vec();
    let replicates = cfg.simulation.replicates;
    let results: Vec<Vec<RunSummary>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<RunSummary>> {
            let graph = match &fixed_graph {
                Some(g) => g.clone(),
                None => scenario.graph(r)?,
            };
            if args.write_graphs {
                graph.write_edge_list(output::create(
                    &out.join(format!("graph_{r:03}_edges.txt")),
                )?)?;
                graph.write_labels(output::create(
                    &out.join(format!("graph_{r:03}_labels.txt")),
                )?)?;
            }
            modes
                .iter()
                .map(|&mode| {
                    let t = match mode {
                        Mode::Blockchain => scenario.run(r, &graph, ttd.as_ref())?,
                        Mode::Baseline => scenario.run(r, &graph, None)?,
                    };
                    let tag = format!("{}_{r:03}", mode.name());
                    output::write_trajectory(
                        output::create(&out.join(format!("trajectory_{tag}.csv")))?,
                        &t.aggregate,
                        &t.communities,
                    )?;
                    write_metrics_csv(out.join(format!("lambda_{tag}.csv")), &t)?;
                    summarize(&t, &sizes)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut per_replicate = Vec::new();
    for (r, runs) in results.iter().enumerate() {
        let mut entry = serde_json::Map::new();
        entry.insert("replicate".into(), json!(r));
        entry.insert("seed".into(), json!(scenario.replicate_seed(r)));
        for (mode, run) in modes.iter().zip(runs) {
            entry.insert(mode.name().into(), run.json.clone());
        }
        per_replicate.push(Value::Object(entry));
    }
    let mut summary = serde_json::Map::new();
    for (k, mode) in modes.iter().enumerate() {
        let runs: Vec<&RunSummary> = results.iter().map(|r| &r[k]).collect();
        summary.insert(mode.name().into(), aggregate(&runs, sizes.len()));
    }
    if modes.len() == 2 {
        let block: Vec<&RunSummary> = results.iter().map(|r| &r[0]).collect();
        let base: Vec<&RunSummary> = results.iter().map(|r| &r[1]).collect();
        summary.insert("paired".into(), paired(&block, &base));
    }
    let metrics = json!({
        "rng_seed": cfg.simulation.rng_seed,
        "replicates": replicates,
        "success_probability": ttd.as_ref().map(|t| json_num(t.success_probability())),
        "summary": summary,
        "per_replicate": per_replicate,
    });
    output::write_json(&out.join("metrics.json"), &metrics)?;
    eprintln!("wrote {} replicate(s) to {}", replicates, out.display());
    Ok(())
}

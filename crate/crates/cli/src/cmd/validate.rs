use anyhow::Result;
use clap::{Args, ValueEnum};
use misinfo_core::doublespend::{
    hitting_recursion, sample_transmission_time, success_probability, tk_cdf, BlockTime,
    ConfirmationDepth, HittingDistribution, TransmissionTimeDistribution, DEFAULT_TOL,
};
use misinfo_core::estimation::{metropolis_hastings, synthesize, ChainConfig, ParamVector};
use misinfo_core::meanfield::{
    blockchain_sir_run, classical_sir_run, DelayModel, MeanFieldParams, TransmissionKernel,
    WindowConvention,
};
use misinfo_core::oracle;
use misinfo_core::rng::{substream, Stream};

use crate::output::num;
use crate::{ChainArgs, ValidationFailed};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Monte-Carlo mining races against the closed forms and the sampler.
    Race,
    /// Exhaustive walk enumeration against the hitting distribution.
    Ballot,
    /// Zero-delay mean-field model against the classical one.
    Reduction,
    /// Prior-only chain against the uniform priors.
    Prior,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte-Carlo trials for the race suite.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(name.to_string());
        }
    }
}

pub fn run(args: ValidateArgs) -> Result<()> {
    let mut report = Report { failures: vec![] };
    match args.suite {
        Suite::Race => race(&args, &mut report)?,
        Suite::Ballot => ballot(&mut report)?,
        Suite::Reduction => reduction(&mut report)?,
        Suite::Prior => prior(&args, &mut report)?,
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(ValidationFailed(report.failures.join(", ")).into())
    }
}

/// Races long enough that an unfinished race has negligible chance of ever
/// finishing.
const RACE_HORIZON: f64 = 400.0;

fn race(args: &ValidateArgs, report: &mut Report) -> Result<()> {
    let depth = args.chain.depth()?;
    let power = args.chain.power()?;
    let succ = success_probability(depth, power)?;
    let times = oracle::race_times(
        args.seed,
        depth,
        power.dishonest(),
        power.honest(),
        RACE_HORIZON,
        args.trials,
    );
    let hits = times.iter().filter(|t| t.is_finite()).count() as f64 / args.trials as f64;
    let sigma = oracle::binomial_sigma(succ, args.trials);
    report.check(
        "success-fraction",
        (hits - succ).abs() <= 3.0 * sigma,
        format!("observed {hits}, expected {succ} +/- {}", 3.0 * sigma),
    );

    let ttd = TransmissionTimeDistribution::new(depth, power, args.tol)?;
    let hitting = HittingDistribution::new(depth, power, args.tol)?;
    let emp = oracle::empirical_cdf(&times, ttd.s_max());
    let dev = emp
        .iter()
        .enumerate()
        .map(|(s, e)| (e - tk_cdf(s as f64, &hitting, power, args.tol)).abs())
        .fold(0.0, f64::max);
    report.check(
        "cdf-deviation",
        dev < 0.005,
        format!(
            "max |empirical - tk_cdf| = {dev} over s = 0..={}",
            ttd.s_max()
        ),
    );

    let n = 100_000;
    let mut rng = substream(args.seed, Stream::Sampling);
    let mut finite = Vec::new();
    let mut infinite = 0usize;
    for _ in 0..n {
        match sample_transmission_time(&mut rng, &ttd)? {
            BlockTime::Finite(s) => finite.push(s),
            BlockTime::Infinite => infinite += 1,
        }
    }
    let normalized: Vec<f64> = ttd.cdf_grid().iter().map(|c| c / succ).collect();
    let ks = oracle::ks_distance(&finite, &normalized);
    report.check(
        "sampler-ks",
        ks < 0.01,
        format!("KS distance {ks} over {} finite samples", finite.len()),
    );
    let frac = infinite as f64 / n as f64;
    let sigma = oracle::binomial_sigma(1.0 - succ, n);
    report.check(
        "sampler-infinite-fraction",
        (frac - (1.0 - succ)).abs() <= 3.0 * sigma,
        format!(
            "observed {frac}, expected {} +/- {}",
            1.0 - succ,
            3.0 * sigma
        ),
    );
    Ok(())
}

fn ballot(report: &mut Report) -> Result<()> {
    const MAX_LEN: u32 = 15;
    for k in 1..=3u32 {
        let counts = oracle::first_passage_counts(k, MAX_LEN);
        let exact = (0..counts.len() as u32).all(|n| {
            let expect = if n >= k && (n - k) % 2 == 0 {
                oracle::ballot_count(k, (n - k) / 2)
            } else {
                0
            };
            counts[n as usize] == expect
        });
        report.check(
            &format!("ballot-counts-k{k}"),
            exact,
            format!("first-passage counts for walks up to length {MAX_LEN}"),
        );
        for p in [0.1, 0.3, 0.45] {
            let g = hitting_recursion(ConfirmationDepth::new(k)?, p, MAX_LEN as usize)?;
            let enumerated = oracle::first_passage_probabilities(k, p, MAX_LEN);
            let worst = (0..=(MAX_LEN - k) / 2)
                .map(|i| {
                    let e = enumerated[(k + 2 * i) as usize];
                    (g[i as usize] - e).abs() / e
                })
                .fold(0.0, f64::max);
            report.check(
                &format!("ballot-probabilities-k{k}-p{p}"),
                worst < 1e-12,
                format!("max relative gap {}", num(worst)),
            );
        }
    }
    Ok(())
}

fn reduction(report: &mut Report) -> Result<()> {
    let params = MeanFieldParams {
        beta: 0.00359,
        alpha: 0.02166,
        s0: 115.67961,
        i0: 4.48387,
        r0: 0.0,
    };
    let steps = 500;
    let classical = classical_sir_run(&params, steps)?;
    for windows in [WindowConvention::Inclusive, WindowConvention::Disjoint] {
        for l in [1, 15] {
            let delay = DelayModel {
                kernel: TransmissionKernel::dirac_at_zero(),
                time_scale: l,
                windows,
            };
            let delayed = blockchain_sir_run(&params, &delay, steps)?;
            let worst = (0..=steps)
                .map(|t| {
                    (classical.s[t] - delayed.s[t])
                        .abs()
                        .max((classical.i[t] - delayed.i[t]).abs())
                        .max((classical.r[t] - delayed.r[t]).abs())
                })
                .fold(0.0, f64::max);
            report.check(
                &format!("reduction-{windows:?}-l{l}").to_lowercase(),
                worst <= 1e-12,
                format!("max per-step gap {} over {steps} steps", num(worst)),
            );
        }
    }
    Ok(())
}

fn prior(args: &ValidateArgs, report: &mut Report) -> Result<()> {
    let truth = ParamVector {
        beta: 0.00359,
        alpha: 0.02166,
        i0: 4.48387,
        s0: 115.67961,
        sigma: 14.87384,
    };
    let data = synthesize(&mut substream(args.seed, Stream::Noise), &truth, 87)?;
    let n = 100_000;
    let thin = 25;
    let burn = 10_000;
    let cfg = ChainConfig {
        iterations: burn + n * thin,
        burn_in_fraction: burn as f64 / (burn + n * thin) as f64,
        thin,
        prior_only: true,
        ..ChainConfig::default()
    };
    let chain = metropolis_hastings(&mut substream(args.seed, Stream::Chain), &data, &cfg)?;
    let beta: Vec<f64> = chain.samples.iter().map(|p| p.beta).collect();
    let alpha: Vec<f64> = chain.samples.iter().map(|p| p.alpha).collect();
    for (name, xs) in [("beta", &beta), ("alpha", &alpha)] {
        let ks = oracle::ks_uniform(xs, 0.0, 1.0);
        report.check(
            &format!("prior-{name}"),
            ks < 0.01,
            format!("KS distance {ks} against U(0, 1) over {} samples", xs.len()),
        );
    }
    Ok(())
}

//! Independent reference computations used to validate the analytic
//! distributions: exhaustive walk enumeration, direct race simulation and
//! distribution distances. None of these go through the recursion or the
//! Poisson mixtures in [`crate::doublespend`].

use rand_distr::{Distribution, Exp};

use crate::doublespend::{monte_carlo_race, ConfirmationDepth};
use crate::rng::{substream, Stream};

/// Number of ±1 sequences of length `n` whose partial sums reach `+k` for
/// the first time at step `n`, for every `n` in `0..=max_len`.
///
/// Brute force over all `2^n` sequences of each length.
pub fn first_passage_counts(k: u32, max_len: u32) -> Vec<u64> {
    assert!(max_len < 31, "enumeration limited to lengths below 31");
    let target = i64::from(k);
    (0..=max_len)
        .map(|n| {
            (0u64..1 << n)
                .filter(|&bits| {
                    let mut sum = 0_i64;
                    for step in 0..n {
                        sum += if bits >> step & 1 == 1 { 1 } else { -1 };
                        if sum == target {
                            return step + 1 == n;
                        }
                    }
                    false
                })
                .count() as u64
        })
        .collect()
}

/// `P(N_k = n)` for `n = 0..=max_len` from exhaustive enumeration.
pub fn first_passage_probabilities(k: u32, p: f64, max_len: u32) -> Vec<f64> {
    first_passage_counts(k, max_len)
        .into_iter()
        .enumerate()
        .map(|(n, count)| {
            if count == 0 {
                return 0.0;
            }
            let n = n as i32;
            let ups = (n + k as i32) / 2;
            count as f64 * p.powi(ups) * (1.0 - p).powi(n - ups)
        })
        .collect()
}

/// Ballot-theorem count `k/(k+2i) * C(k+2i, k+i)` in exact integer arithmetic.
pub fn ballot_count(k: u32, i: u32) -> u64 {
    let n = u64::from(k + 2 * i);
    let mut binom: u128 = 1;
    let r = u64::from(i).min(n - u64::from(i));
    for j in 0..r {
        binom = binom * u128::from(n - j) / u128::from(j + 1);
    }
    (binom * u128::from(k) / u128::from(n)) as u64
}

/// Hitting times from `trials` independent races on seed `seed`.
pub fn race_times(
    seed: u64,
    k: ConfirmationDepth,
    mu_d: f64,
    mu_h: f64,
    horizon: f64,
    trials: usize,
) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Race);
    (0..trials)
        .map(|_| monte_carlo_race(&mut rng, k, mu_d, mu_h, horizon))
        .collect()
}

/// Fraction of `times` at or below each integer `s = 0..=s_max`.
pub fn empirical_cdf(times: &[f64], s_max: usize) -> Vec<f64> {
    let mut counts = vec![0_u64; s_max + 2];
    for &t in times.iter().filter(|t| t.is_finite()) {
        let bin = (t.ceil() as usize).min(s_max + 1);
        counts[bin] += 1;
    }
    let n = times.len() as f64;
    let mut acc = 0;
    counts[..=s_max]
        .iter()
        .map(|&c| {
            acc += c;
            acc as f64 / n
        })
        .collect()
}

/// Largest absolute gap between the empirical CDF of integer samples and a
/// reference CDF tabulated on `0..cdf.len()`.
pub fn ks_distance(samples: &[u64], cdf: &[f64]) -> f64 {
    let mut counts = vec![0_u64; cdf.len()];
    let mut overflow = 0_u64;
    for &s in samples {
        match counts.get_mut(s as usize) {
            Some(c) => *c += 1,
            None => overflow += 1,
        }
    }
    let n = samples.len() as f64;
    let mut acc = 0_u64;
    let mut worst = 0.0_f64;
    for (c, &f) in counts.iter().zip(cdf) {
        acc += c;
        worst = worst.max((acc as f64 / n - f).abs());
    }
    if overflow > 0 {
        worst = worst.max(overflow as f64 / n);
    }
    worst
}

/// Monte-Carlo estimate of `P(T_k <= s and at most one further block is
/// mined in (T_k, s])`, the event whose probability the pointwise
/// transmission PMF evaluates.
pub fn literal_pmf_event_frequency(
    seed: u64,
    k: ConfirmationDepth,
    mu_d: f64,
    mu_h: f64,
    s: f64,
    trials: usize,
) -> f64 {
    let mut rng = substream(seed, Stream::Race);
    let gap = Exp::new(mu_d + mu_h).expect("positive total rate");
    let mut hits = 0_u64;
    for _ in 0..trials {
        let t = monte_carlo_race(&mut rng, k, mu_d, mu_h, s);
        if t.is_finite() && t + gap.sample(&mut rng) + gap.sample(&mut rng) > s {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Binomial standard error of a frequency estimate.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One-sample KS distance of `samples` against the uniform law on `[lo, hi]`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted: Vec<f64> = samples.iter().map(|&x| (x - lo) / (hi - lo)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo_gap = x - i as f64 / n;
            let hi_gap = (i + 1) as f64 / n - x;
            lo_gap.max(hi_gap)
        })
        .fold(0.0, f64::max)
}

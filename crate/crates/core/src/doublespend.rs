//! Double-spend race and the transmission-time distribution it induces.
//!
//! Dishonest and honest miners produce blocks as independent Poisson
//! processes. Viewed per block, the dishonest lead is a ±1 random walk with
//! up-probability `p = mu_d / (mu_d + mu_h)`. `N_k` is the number of blocks
//! until that walk first reaches `+k`, and `T_k` is the time of that block in
//! the superposed Poisson process of rate `mu = mu_d + mu_h`.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};

/// Default truncation tolerance for the infinite sums.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Hard ceiling on stored hitting-probability terms.
const MAX_HITTING_TERMS: usize = 20_000_000;

/// Hard ceiling on the auto-sized block-time grid.
const MAX_GRID_LEN: usize = 10_000_000;

/// Block production rates of the two mining coalitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinerPower {
    mu_d: f64,
    mu_h: f64,
}

impl MinerPower {
    pub fn new(mu_d: f64, mu_h: f64) -> Result<Self> {
        if !(mu_d.is_finite() && mu_d > 0.0) {
            return Err(Error::domain(
                "mu_d",
                format!("{mu_d} must be finite and > 0"),
            ));
        }
        if !(mu_h.is_finite() && mu_h > 0.0) {
            return Err(Error::domain(
                "mu_h",
                format!("{mu_h} must be finite and > 0"),
            ));
        }
        Ok(Self { mu_d, mu_h })
    }

    /// Rates with dishonest share `p` of a total block rate `mu`.
    pub fn from_share(p: f64, mu: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain("p", format!("{p} must lie in (0, 1)")));
        }
        Self::new(p * mu, (1.0 - p) * mu)
    }

    pub fn dishonest(&self) -> f64 {
        self.mu_d
    }

    pub fn honest(&self) -> f64 {
        self.mu_h
    }

    /// Total block rate `mu_d + mu_h`.
    pub fn total(&self) -> f64 {
        self.mu_d + self.mu_h
    }

    /// Probability that the next block is dishonest.
    pub fn win_probability(&self) -> f64 {
        self.mu_d / (self.mu_d + self.mu_h)
    }

    pub fn ratio(&self) -> f64 {
        self.mu_d / self.mu_h
    }
}

/// Number of successive confirming blocks `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ConfirmationDepth(u32);

impl ConfirmationDepth {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k", "confirmation depth must be >= 1"));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for ConfirmationDepth {
    type Error = Error;

    fn try_from(k: u32) -> Result<Self> {
        Self::new(k)
    }
}

impl From<ConfirmationDepth> for u32 {
    fn from(k: ConfirmationDepth) -> u32 {
        k.0
    }
}

/// A time on the block-time axis that may never arrive.
///
/// `Finite` orders before `Infinite`, so `min` picks the earliest arrival.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockTime {
    Finite(u64),
    Infinite,
}

impl BlockTime {
    pub fn is_finite(self) -> bool {
        matches!(self, BlockTime::Finite(_))
    }
}

/// Probability of eventual success `(mu_d / mu_h)^k`.
///
/// Only defined for a minority attacker; a majority attacker succeeds
/// almost surely and is rejected.
pub fn success_probability(k: ConfirmationDepth, power: MinerPower) -> Result<f64> {
    if power.mu_d >= power.mu_h {
        return Err(Error::domain(
            "power",
            format!(
                "success probability requires mu_d < mu_h (got {} >= {})",
                power.mu_d, power.mu_h
            ),
        ));
    }
    Ok(power.ratio().powi(k.get() as i32))
}

/// `P(N_k = k + 2i)` in closed form, evaluated in log space.
pub fn hitting_pmf(k: ConfirmationDepth, p: f64, i: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", format!("{p} must lie in (0, 1)")));
    }
    let k = u64::from(k.get());
    let n = k + 2 * i;
    let ln = (k as f64).ln() - (n as f64).ln()
        + ln_binomial(n, k + i)
        + (k + i) as f64 * p.ln()
        + i as f64 * (1.0 - p).ln();
    Ok(ln.exp())
}

/// The ratio recursion for `g(i)`, unbounded.
struct HittingTerms {
    k: f64,
    step: f64,
    i: f64,
    g: f64,
}

impl HittingTerms {
    fn new(depth: ConfirmationDepth, p: f64) -> Self {
        let k = f64::from(depth.get());
        Self {
            k,
            step: p * (1.0 - p),
            i: 0.0,
            g: p.powf(k),
        }
    }
}

impl Iterator for HittingTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.g;
        let (k, i) = (self.k, self.i);
        self.g *= (k + 2.0 * i) * (k + 2.0 * i + 1.0) / ((k + i + 1.0) * (i + 1.0)) * self.step;
        self.i += 1.0;
        Some(out)
    }
}

/// `g(0..=n)` from the ratio recursion, without truncation.
pub fn hitting_recursion(k: ConfirmationDepth, p: f64, n: usize) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", format!("{p} must lie in (0, 1)")));
    }
    Ok(HittingTerms::new(k, p).take(n + 1).collect())
}

/// Tabulated law of the first-passage count `N_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HittingDistribution {
    depth: ConfirmationDepth,
    p: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    total_mass: f64,
    sup_g: f64,
}

impl HittingDistribution {
    /// Builds `g(i)` from `g(0) = p^k` and the ratio recursion
    /// `g(i+1)/g(i) = (k+2i)(k+2i+1) / ((k+i+1)(i+1)) * p(1-p)`.
    ///
    /// For a minority attacker the table stops once the residual mass below
    /// `(mu_d/mu_h)^k` is under `tol`; otherwise once `g(i) < tol * g(0)`.
    pub fn new(depth: ConfirmationDepth, power: MinerPower, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::domain(
                "tol",
                format!("{tol} must be finite and > 0"),
            ));
        }
        let p = power.win_probability();
        let k = f64::from(depth.get());
        let minority = power.mu_d < power.mu_h;
        let total_mass = if minority { power.ratio().powf(k) } else { 1.0 };
        let g0 = p.powf(k);
        let mut pmf = vec![g0];
        let mut cdf = vec![g0];
        let mut acc = g0;
        for g in HittingTerms::new(depth, p).skip(1) {
            let prev = pmf[pmf.len() - 1];
            let done = if minority {
                // Also stop once terms no longer move the sum.
                total_mass - acc < tol || acc + prev == acc
            } else {
                prev < tol * g0
            };
            if done || prev == 0.0 || pmf.len() >= MAX_HITTING_TERMS {
                break;
            }
            acc += g;
            pmf.push(g);
            cdf.push(acc);
        }
        let sup_g = pmf.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            depth,
            p,
            pmf,
            cdf,
            total_mass,
            sup_g,
        })
    }

    pub fn depth(&self) -> ConfirmationDepth {
        self.depth
    }

    pub fn win_probability(&self) -> f64 {
        self.p
    }

    /// Largest stored index.
    pub fn i_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `g(i) = P(N_k = k + 2i)`; zero past the truncation point.
    pub fn g(&self, i: usize) -> f64 {
        self.pmf.get(i).copied().unwrap_or(0.0)
    }

    /// `G(i) = P(N_k <= k + 2i)`; saturates at `G(i_max)`.
    pub fn cumulative(&self, i: usize) -> f64 {
        self.cdf[i.min(self.cdf.len() - 1)]
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    fn sup_g(&self) -> f64 {
        self.sup_g
    }

    /// Probability mass not captured by the table.
    pub fn tail_bound(&self) -> f64 {
        (self.total_mass - self.cdf[self.cdf.len() - 1]).max(0.0)
    }

    /// `P(N_k < inf)`: `(mu_d/mu_h)^k` for a minority attacker, else 1.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// Poisson weights `e^{-m} m^n / n!` for `n = k, k+1, ...` in log space.
struct PoissonTerms {
    ln_mean: f64,
    mean: f64,
    n: u64,
}

impl PoissonTerms {
    fn starting_at(mean: f64, n: u64) -> Self {
        Self {
            ln_mean: mean.ln(),
            mean,
            n,
        }
    }

    fn weight(&self) -> f64 {
        (-self.mean + self.n as f64 * self.ln_mean - ln_factorial(self.n)).exp()
    }

    /// Bound on `P(Poisson > n)` given the current weight, valid past the mode.
    fn upper_tail(&self, weight: f64) -> Option<f64> {
        let ratio = self.mean / (self.n as f64 + 2.0);
        (ratio < 1.0).then(|| weight * self.mean / (self.n as f64 + 1.0) / (1.0 - ratio))
    }
}

/// Sum `Σ_j coef(⌊j/2⌋) · Pois(k + j; mu s)` with tail-bounded truncation.
///
/// Past the Poisson mode the remaining terms are bounded both by
/// `sup_coef` times the Poisson upper tail and by twice the remaining
/// coefficient mass `coef_tail(i)` (each index appears for two values of j).
/// Summation stops once the smaller bound drops under `tol`.
fn poisson_mixture(
    s: f64,
    mu: f64,
    k: u32,
    tol: f64,
    coef: impl Fn(usize) -> f64,
    sup_coef: f64,
    coef_tail: impl Fn(usize) -> f64,
) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    let mut terms = PoissonTerms::starting_at(mu * s, u64::from(k));
    let mut sum = 0.0;
    let mut j: usize = 0;
    loop {
        let w = terms.weight();
        sum += coef(j / 2) * w;
        if let Some(pois_tail) = terms.upper_tail(w) {
            let by_poisson = pois_tail * sup_coef;
            let by_coef = 2.0 * coef_tail(j / 2 + 1);
            if by_poisson.min(by_coef) < tol {
                break;
            }
        }
        j += 1;
        terms.n += 1;
    }
    sum
}

/// Eq-literal transmission "PMF" at block time `s`:
/// `Σ_j g(⌊j/2⌋) e^{-mu s} (mu s)^{j+k} / (j+k)!`.
pub fn tk_pmf(s: f64, dist: &HittingDistribution, power: MinerPower, tol: f64) -> f64 {
    let total = dist.cdf()[dist.i_max()];
    poisson_mixture(
        s,
        power.total(),
        dist.depth().get(),
        tol,
        |i| dist.g(i),
        dist.sup_g(),
        |i| (total - dist.cumulative(i - 1)).max(0.0) + dist.tail_bound(),
    )
}

/// `P(T_k <= s) = Σ_j G(⌊j/2⌋) e^{-mu s} (mu s)^{j+k} / (j+k)!`, clamped to
/// `[0, P(N_k < inf)]`.
pub fn tk_cdf(s: f64, dist: &HittingDistribution, power: MinerPower, tol: f64) -> f64 {
    let cap = dist.total_mass();
    let v = poisson_mixture(
        s,
        power.total(),
        dist.depth().get(),
        tol,
        |i| dist.cumulative(i),
        cap,
        |_| f64::INFINITY,
    );
    v.clamp(0.0, cap)
}

/// Tabulated transmission-time distribution on the integer block-time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionTimeDistribution {
    power: Option<MinerPower>,
    depth: Option<ConfirmationDepth>,
    hitting: Option<HittingDistribution>,
    success: f64,
    tol: f64,
    cdf_grid: Vec<f64>,
}

impl TransmissionTimeDistribution {
    /// Grid sized automatically: extended until `P(T_k <= s)` is within
    /// `2 tol` of the success probability.
    pub fn new(depth: ConfirmationDepth, power: MinerPower, tol: f64) -> Result<Self> {
        Self::build(depth, power, tol, None)
    }

    /// Grid fixed to `s = 0..=s_max`.
    pub fn with_grid(
        depth: ConfirmationDepth,
        power: MinerPower,
        tol: f64,
        s_max: usize,
    ) -> Result<Self> {
        Self::build(depth, power, tol, Some(s_max))
    }

    fn build(
        depth: ConfirmationDepth,
        power: MinerPower,
        tol: f64,
        s_max: Option<usize>,
    ) -> Result<Self> {
        let success = success_probability(depth, power)?;
        let hitting = HittingDistribution::new(depth, power, tol)?;
        let mut grid = Vec::new();
        let mut running = 0.0_f64;
        let target = success - 2.0 * tol;
        for s in 0.. {
            let v = tk_cdf(s as f64, &hitting, power, tol);
            running = running.max(v);
            grid.push(running);
            let stop = match s_max {
                Some(max) => s >= max,
                None => running >= target || grid.len() >= MAX_GRID_LEN,
            };
            if stop {
                break;
            }
        }
        Ok(Self {
            power: Some(power),
            depth: Some(depth),
            hitting: Some(hitting),
            success,
            tol,
            cdf_grid: grid,
        })
    }

    /// Arbitrary distribution given by its success probability and a grid of
    /// `P(T <= s)` values (not normalized). The grid is repaired to be
    /// nondecreasing and clamped to `[0, success]`.
    pub fn from_cdf_grid(success: f64, cdf_grid: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&success) {
            return Err(Error::domain(
                "success",
                format!("{success} must lie in [0, 1]"),
            ));
        }
        if cdf_grid.is_empty() {
            return Err(Error::domain("cdf_grid", "must be nonempty"));
        }
        let mut running = 0.0_f64;
        let grid = cdf_grid
            .into_iter()
            .map(|v| {
                running = running.max(v.clamp(0.0, success));
                running
            })
            .collect();
        Ok(Self {
            power: None,
            depth: None,
            hitting: None,
            success,
            tol: 0.0,
            cdf_grid: grid,
        })
    }

    /// All finite mass at block time `s`, with success probability `success`.
    pub fn point_mass(s: usize, success: f64) -> Result<Self> {
        let mut grid = vec![0.0; s + 1];
        grid[s] = success;
        Self::from_cdf_grid(success, grid)
    }

    pub fn power(&self) -> Option<MinerPower> {
        self.power
    }

    pub fn depth(&self) -> Option<ConfirmationDepth> {
        self.depth
    }

    pub fn hitting(&self) -> Option<&HittingDistribution> {
        self.hitting.as_ref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `P(T_k < inf)`.
    pub fn success_probability(&self) -> f64 {
        self.success
    }

    /// `P(T_k <= s)` for `s = 0..=s_max`.
    pub fn cdf_grid(&self) -> &[f64] {
        &self.cdf_grid
    }

    pub fn s_max(&self) -> usize {
        self.cdf_grid.len() - 1
    }

    /// Grid increments `P(s-1 < T_k <= s)`, with index 0 holding `P(T_k <= 0)`.
    pub fn increment_pmf(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf_grid
            .iter()
            .map(|&c| {
                let d = c - prev;
                prev = c;
                d
            })
            .collect()
    }

    /// Pointwise `tk_pmf` on the grid. Falls back to grid increments for
    /// distributions built from a raw grid.
    pub fn literal_pmf(&self) -> Vec<f64> {
        match (&self.hitting, self.power) {
            (Some(h), Some(power)) => (0..=self.s_max())
                .map(|s| tk_pmf(s as f64, h, power, self.tol))
                .collect(),
            _ => self.increment_pmf(),
        }
    }

    /// Inverse of the conditional CDF `P(T_k <= s | T_k < inf)`: the smallest
    /// grid point with positive CDF whose normalized value reaches `u`.
    pub fn conditional_quantile(&self, u: f64) -> Result<u64> {
        let threshold = u * self.success;
        let idx = self
            .cdf_grid
            .partition_point(|&c| c <= 0.0 || c < threshold);
        if idx == self.cdf_grid.len() {
            let last = self.cdf_grid[self.cdf_grid.len() - 1];
            return Err(Error::GridExhausted {
                quantile: u,
                reached: if self.success > 0.0 {
                    last / self.success
                } else {
                    0.0
                },
                s_max: self.s_max(),
            });
        }
        Ok(idx as u64)
    }

    /// Inverse transform sampling with explicit uniforms: infinite when
    /// `u1 > P(T_k < inf)`, otherwise the conditional quantile of `u2`.
    pub fn sample_with(&self, u1: f64, u2: impl FnOnce() -> f64) -> Result<BlockTime> {
        if u1 > self.success {
            return Ok(BlockTime::Infinite);
        }
        self.conditional_quantile(u2()).map(BlockTime::Finite)
    }
}

/// Draws one transmission time by inverse transform sampling.
pub fn sample_transmission_time<R: Rng + ?Sized>(
    rng: &mut R,
    ttd: &TransmissionTimeDistribution,
) -> Result<BlockTime> {
    let u1: f64 = rng.random();
    ttd.sample_with(u1, || rng.random())
}

/// Direct simulation of the mining race.
///
/// Returns the first time the dishonest count leads the honest count by `k`,
/// or `f64::INFINITY` if that does not happen by `horizon`. Rates may be zero
/// here, unlike [`MinerPower`].
pub fn monte_carlo_race<R: Rng + ?Sized>(
    rng: &mut R,
    k: ConfirmationDepth,
    mu_d: f64,
    mu_h: f64,
    horizon: f64,
) -> f64 {
    debug_assert!(mu_d >= 0.0 && mu_h >= 0.0);
    if mu_d <= 0.0 || !(horizon > 0.0) {
        return f64::INFINITY;
    }
    let mu = mu_d + mu_h;
    let p = mu_d / mu;
    let inter_arrival = Exp::new(mu).expect("positive total rate");
    let target = i64::from(k.get());
    let mut lead = 0_i64;
    let mut t = 0.0;
    loop {
        t += inter_arrival.sample(rng);
        if t > horizon {
            return f64::INFINITY;
        }
        if rng.random::<f64>() < p {
            lead += 1;
            if lead == target {
                return t;
            }
        } else {
            lead -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depth(k: u32) -> ConfirmationDepth {
        ConfirmationDepth::new(k).unwrap()
    }

    fn power(p: f64) -> MinerPower {
        MinerPower::from_share(p, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ConfirmationDepth::new(0).is_err());
        assert!(MinerPower::new(0.0, 1.0).is_err());
        assert!(MinerPower::new(1.0, -1.0).is_err());
        assert!(hitting_pmf(depth(1), 1.0, 0).is_err());
        assert!(hitting_pmf(depth(1), 0.0, 0).is_err());
        assert!(success_probability(depth(1), MinerPower::new(1.0, 1.0).unwrap()).is_err());
        assert!(TransmissionTimeDistribution::new(depth(2), power(0.6), 1e-10).is_err());
        assert!(HittingDistribution::new(depth(2), power(0.3), 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!((hitting_pmf(depth(1), 0.3, 0).unwrap() - 0.3).abs() < 1e-15);
        assert!((hitting_pmf(depth(2), 0.3, 0).unwrap() - 0.09).abs() < 1e-15);
        // Only (-1, +1, +1) first reaches +1 at step 3.
        assert!((hitting_pmf(depth(1), 0.3, 1).unwrap() - 0.7 * 0.3 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn recursion_example() {
        let h = HittingDistribution::new(depth(2), power(0.3), 1e-10).unwrap();
        assert!((h.g(0) - 0.09).abs() < 1e-15);
        assert!((h.g(1) / h.g(0) - 0.42).abs() < 1e-12);
        assert!((h.g(1) - 0.0378).abs() < 1e-15);
    }

    #[test]
    fn success_probability_examples() {
        let p2 = success_probability(depth(2), power(0.3)).unwrap();
        assert!((p2 - (3.0_f64 / 7.0).powi(2)).abs() < 1e-15);
        assert!((p2 - 0.18367).abs() < 1e-5);
        let p5 = success_probability(depth(5), MinerPower::new(0.1, 1.0).unwrap()).unwrap();
        assert!((p5 - 1e-5).abs() < 1e-18);
        let near =
            success_probability(depth(1), MinerPower::new(1.0 - 1e-9, 1.0).unwrap()).unwrap();
        assert!(near > 1.0 - 1e-8);
    }

    #[test]
    fn minority_mass_converges() {
        let h = HittingDistribution::new(depth(3), power(0.3), 1e-9).unwrap();
        let target = (3.0_f64 / 7.0).powi(3);
        let last = h.cumulative(h.i_max());
        assert!(target - last < 1e-9 && target - last >= -1e-15);
        assert!(h.tail_bound() < 1e-9);
        assert!(h.cdf().windows(2).all(|w| w[1] >= w[0]));
        assert!(h.pmf().iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn symmetric_walk_mass_approaches_one() {
        let h = HittingDistribution::new(depth(1), power(0.5), 1e-8).unwrap();
        let last = h.cumulative(h.i_max());
        // g(i) ~ i^{-3/2}, so the residual decays like i^{-1/2}.
        assert!(last > 0.99 && last <= 1.0 + 1e-12, "G = {last}");
        assert!(h.g(h.i_max()) < 1e-8 * h.g(0));
    }

    #[test]
    fn tk_at_zero_vanishes() {
        let pw = power(0.3);
        let h = HittingDistribution::new(depth(2), pw, 1e-10).unwrap();
        assert_eq!(tk_pmf(0.0, &h, pw, 1e-10), 0.0);
        assert_eq!(tk_cdf(0.0, &h, pw, 1e-10), 0.0);
    }

    #[test]
    fn tk_cdf_limit() {
        let pw = power(0.3);
        let h = HittingDistribution::new(depth(2), pw, 1e-10).unwrap();
        let target = (3.0_f64 / 7.0).powi(2);
        let v = tk_cdf(400.0, &h, pw, 1e-10);
        assert!((v - target).abs() < 1e-9, "{v} vs {target}");
    }

    #[test]
    fn tk_cdf_hand_computed_small_s() {
        // e^{-1} Σ_j G(⌊j/2⌋) / (j+2)! with G = [0.09, 0.1278, 0.147645, ...].
        let pw = power(0.3);
        let h = HittingDistribution::new(depth(2), pw, 1e-12).unwrap();
        let mut expected = 0.0;
        let mut fact = 2.0;
        for j in 0..30 {
            if j > 0 {
                fact *= (j + 2) as f64;
            }
            expected += h.cumulative(j / 2) / fact;
        }
        expected *= (-1.0_f64).exp();
        assert!((tk_cdf(1.0, &h, pw, 1e-14) - expected).abs() < 1e-13);
    }

    #[test]
    fn grid_is_monotone_and_bounded() {
        let ttd = TransmissionTimeDistribution::new(depth(2), power(0.3), 1e-10).unwrap();
        let grid = ttd.cdf_grid();
        assert_eq!(grid[0], 0.0);
        assert!(grid.windows(2).all(|w| w[1] >= w[0]));
        let succ = ttd.success_probability();
        assert!(grid[ttd.s_max()] <= succ + 1e-10);
        assert!(grid[ttd.s_max()] >= succ - 2e-10);
        let inc: f64 = ttd.increment_pmf().iter().sum();
        assert!((inc - grid[ttd.s_max()]).abs() < 1e-14);
    }

    #[test]
    fn sampling_branches() {
        let ttd = TransmissionTimeDistribution::new(depth(2), power(0.3), 1e-10).unwrap();
        assert_eq!(ttd.sample_with(0.99, || 0.5).unwrap(), BlockTime::Infinite);
        let first_positive = ttd.cdf_grid().iter().position(|&c| c > 0.0).unwrap() as u64;
        assert_eq!(
            ttd.sample_with(0.0, || 0.0).unwrap(),
            BlockTime::Finite(first_positive)
        );
        assert_eq!(first_positive, 1);
    }

    #[test]
    fn short_grid_exhausts() {
        let ttd = TransmissionTimeDistribution::with_grid(depth(2), power(0.3), 1e-10, 3).unwrap();
        assert_eq!(ttd.s_max(), 3);
        assert!(matches!(
            ttd.conditional_quantile(0.999),
            Err(Error::GridExhausted { s_max: 3, .. })
        ));
    }

    #[test]
    fn point_mass_samples_its_atom() {
        let ttd = TransmissionTimeDistribution::point_mass(1, 1.0).unwrap();
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(ttd.sample_with(0.5, || u).unwrap(), BlockTime::Finite(1));
        }
    }

    #[test]
    fn block_time_ordering() {
        assert!(BlockTime::Finite(u64::MAX) < BlockTime::Infinite);
        assert_eq!(
            BlockTime::Finite(3).min(BlockTime::Finite(2)),
            BlockTime::Finite(2)
        );
    }

    #[test]
    fn race_degenerate_rates() {
        let mut rng = crate::rng::substream(1, crate::rng::Stream::Race);
        for _ in 0..100 {
            assert!(monte_carlo_race(&mut rng, depth(1), 0.0, 1.0, 1e6).is_infinite());
        }
        // Unopposed: first dishonest block, Exp(mu_d); mean 1/mu_d.
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|_| monte_carlo_race(&mut rng, depth(1), 2.0, 0.0, 1e9))
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(),
            "mean {mean}"
        );
    }
}

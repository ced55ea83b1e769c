//! Population-level SIR difference equations.
//!
//! The classical model infects `beta S I` per step. The blockchain model
//! delays every contact by a transmission time: contacts made at step `i`
//! turn into infections at step `t + 1` with the probability mass that the
//! transmission time falls in the block-time window of lag `t + 1 - i`.

use serde::{Deserialize, Serialize};

use crate::doublespend::TransmissionTimeDistribution;
use crate::error::{Error, Result};
use crate::series::SirSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub beta: f64,
    pub alpha: f64,
    pub s0: f64,
    pub i0: f64,
    pub r0: f64,
}

impl MeanFieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta", format!("{} must be >= 0", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(
                "alpha",
                format!("{} must lie in [0, 1]", self.alpha),
            ));
        }
        for (name, v) in [("S0", self.s0), ("I0", self.i0), ("R0", self.r0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(name, format!("{v} must be >= 0")));
            }
        }
        if !(self.population() > 0.0) {
            return Err(Error::domain("population", "S0 + I0 + R0 must be > 0"));
        }
        Ok(())
    }

    pub fn population(&self) -> f64 {
        self.s0 + self.i0 + self.r0
    }
}

/// Which per-lag probability stands in for `P(T_k = s)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfConvention {
    /// Pointwise Poisson-mixture PMF at each integer block time.
    #[default]
    Literal,
    /// `P(s-1 < T_k <= s)`, so lag masses sum to the success probability.
    CdfIncrement,
}

/// How lags are grouped into network steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowConvention {
    /// Window `w` covers lags `wl - l ..= wl`; adjacent windows share
    /// their boundary lag.
    #[default]
    Inclusive,
    /// Window 1 covers lags `0 ..= l`, window `w > 1` covers
    /// `(w-1)l + 1 ..= wl`. Every lag is counted once.
    Disjoint,
}

/// Probability mass per block-time lag, `lag_pmf[s]` for `s = 0, 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionKernel {
    lag_pmf: Vec<f64>,
}

impl TransmissionKernel {
    pub fn new(lag_pmf: Vec<f64>) -> Result<Self> {
        if lag_pmf.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::domain("lag_pmf", "entries must be finite and >= 0"));
        }
        Ok(Self { lag_pmf })
    }

    pub fn from_distribution(
        ttd: &TransmissionTimeDistribution,
        convention: PmfConvention,
    ) -> Self {
        let lag_pmf = match convention {
            PmfConvention::Literal => ttd.literal_pmf(),
            PmfConvention::CdfIncrement => ttd.increment_pmf(),
        };
        Self { lag_pmf }
    }

    /// All mass at lag 0: infection in the same step as the contact, which
    /// reduces the delayed model to the classical one.
    pub fn dirac_at_zero() -> Self {
        Self { lag_pmf: vec![1.0] }
    }

    pub fn lag_pmf(&self) -> &[f64] {
        &self.lag_pmf
    }

    pub fn total_mass(&self) -> f64 {
        self.lag_pmf.iter().sum()
    }

    fn at(&self, lag: i64) -> f64 {
        if lag < 0 {
            return 0.0;
        }
        self.lag_pmf.get(lag as usize).copied().unwrap_or(0.0)
    }

    /// Mass per network-step lag; index 0 is unused (always 0) so that
    /// `windows[w]` is the mass for lag `w >= 1`. Trailing windows past the
    /// kernel support are dropped.
    pub fn window_masses(&self, time_scale: u64, convention: WindowConvention) -> Vec<f64> {
        let l = time_scale as i64;
        let support = self.lag_pmf.len() as i64;
        let last_window = (support + l - 1) / l + 1;
        let mut windows = vec![0.0; last_window as usize + 1];
        for w in 1..=last_window {
            let upper = match convention {
                WindowConvention::Inclusive => l,
                WindowConvention::Disjoint => l - 1,
            };
            let mut mass = 0.0;
            for j in 0..=upper {
                mass += self.at(w * l - j);
            }
            if convention == WindowConvention::Disjoint && w == 1 {
                mass += self.at(0);
            }
            windows[w as usize] = mass;
        }
        while windows.len() > 2 && windows[windows.len() - 1] == 0.0 {
            windows.pop();
        }
        windows
    }
}

/// Blockchain delay settings for [`blockchain_sir_run`].
#[derive(Clone, Debug, PartialEq)]
pub struct DelayModel {
    pub kernel: TransmissionKernel,
    pub time_scale: u64,
    pub windows: WindowConvention,
}

fn apply_step(series: &mut SirSeries, t: usize, infections: f64, alpha: f64) {
    let (s, i, r) = (series.s[t], series.i[t], series.r[t]);
    let infections = infections.clamp(0.0, s);
    let recoveries = (alpha * i).clamp(0.0, i);
    series.push(s - infections, i + infections - recoveries, r + recoveries);
}

/// Forward-Euler classical SIR for `horizon` steps (`horizon + 1` points).
pub fn classical_sir_run(params: &MeanFieldParams, horizon: usize) -> Result<SirSeries> {
    params.validate()?;
    let mut series = SirSeries::with_capacity(horizon + 1);
    series.push(params.s0, params.i0, params.r0);
    for t in 0..horizon {
        let contacts = params.beta * series.s[t] * series.i[t];
        apply_step(&mut series, t, contacts, params.alpha);
    }
    Ok(series)
}

/// Delayed SIR: new infections at `t + 1` are
/// `Σ_{i<=t} beta S(i) I(i) · W(t + 1 - i)` where `W` are the window
/// masses of the transmission kernel.
pub fn blockchain_sir_run(
    params: &MeanFieldParams,
    delay: &DelayModel,
    horizon: usize,
) -> Result<SirSeries> {
    params.validate()?;
    if delay.time_scale == 0 {
        return Err(Error::domain("l", "time-scale ratio must be >= 1"));
    }
    let windows = delay.kernel.window_masses(delay.time_scale, delay.windows);
    let reach = windows.len() - 1;
    let mut contacts = Vec::with_capacity(horizon + 1);
    let mut series = SirSeries::with_capacity(horizon + 1);
    series.push(params.s0, params.i0, params.r0);
    for t in 0..horizon {
        contacts.push(params.beta * series.s[t] * series.i[t]);
        let oldest = (t + 1).saturating_sub(reach);
        let mut infections = 0.0;
        for (i, &c) in contacts.iter().enumerate().skip(oldest) {
            infections += c * windows[t + 1 - i];
        }
        apply_step(&mut series, t, infections, params.alpha);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doublespend::{ConfirmationDepth, MinerPower};

    fn table_ii() -> MeanFieldParams {
        MeanFieldParams {
            beta: 0.00359,
            alpha: 0.02166,
            s0: 115.67961,
            i0: 4.48387,
            r0: 0.0,
        }
    }

    fn ttd(p_d: f64, mu_h: f64) -> TransmissionTimeDistribution {
        TransmissionTimeDistribution::new(
            ConfirmationDepth::new(2).unwrap(),
            MinerPower::new(p_d, mu_h).unwrap(),
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn constant_when_nothing_moves() {
        let mut p = table_ii();
        p.beta = 0.0;
        p.alpha = 0.0;
        let s = classical_sir_run(&p, 20).unwrap();
        assert!(s.s.iter().all(|&v| v == p.s0));
        assert!(s.i.iter().all(|&v| v == p.i0));

        let mut p = table_ii();
        p.i0 = 0.0;
        let s = classical_sir_run(&p, 20).unwrap();
        assert!(s.s.iter().all(|&v| v == p.s0));
        assert!(s.i.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conservation_and_nonnegativity() {
        let mut p = table_ii();
        p.beta = 0.05; // overshooting Euler step
        let s = classical_sir_run(&p, 200).unwrap();
        let n = p.population();
        for t in 0..s.len() {
            assert!((s.population(t) - n).abs() < 1e-9);
            assert!(s.s[t] >= 0.0 && s.i[t] >= 0.0 && s.r[t] >= 0.0);
        }
    }

    #[test]
    fn window_masses_partition_lags() {
        let k = TransmissionKernel::new((0..10).map(|s| s as f64).collect()).unwrap();
        // l = 3, inclusive: w1 = lags 0..=3, w2 = 3..=6, w3 = 6..=9, w4 = 9..=12.
        let inc = k.window_masses(3, WindowConvention::Inclusive);
        assert_eq!(inc, vec![0.0, 6.0, 18.0, 30.0, 9.0]);
        // Disjoint: w1 = 0..=3, w2 = 4..=6, w3 = 7..=9.
        let dis = k.window_masses(3, WindowConvention::Disjoint);
        assert_eq!(dis, vec![0.0, 6.0, 15.0, 24.0]);
        assert_eq!(dis.iter().sum::<f64>(), k.total_mass());
    }

    #[test]
    fn dirac_kernel_reduces_to_classical() {
        let p = table_ii();
        let classical = classical_sir_run(&p, 300).unwrap();
        for windows in [WindowConvention::Inclusive, WindowConvention::Disjoint] {
            let delay = DelayModel {
                kernel: TransmissionKernel::dirac_at_zero(),
                time_scale: 15,
                windows,
            };
            let delayed = blockchain_sir_run(&p, &delay, 300).unwrap();
            assert_eq!(delayed, classical);
        }
    }

    #[test]
    fn vanishing_success_means_no_transmission() {
        let p = table_ii();
        let delay = DelayModel {
            kernel: TransmissionKernel::from_distribution(&ttd(1e-7, 1.0), PmfConvention::Literal),
            time_scale: 15,
            windows: WindowConvention::Inclusive,
        };
        let s = blockchain_sir_run(&p, &delay, 200).unwrap();
        assert!(s.s.iter().all(|&v| (v - p.s0).abs() < 1e-6));
    }

    #[test]
    fn blockchain_peak_lower_and_later() {
        let p = table_ii();
        let classical = classical_sir_run(&p, 400).unwrap();
        for pmf in [PmfConvention::Literal, PmfConvention::CdfIncrement] {
            let delay = DelayModel {
                kernel: TransmissionKernel::from_distribution(&ttd(0.3, 0.7), pmf),
                time_scale: 15,
                windows: WindowConvention::Inclusive,
            };
            let delayed = blockchain_sir_run(&p, &delay, 400).unwrap();
            let argmax = |v: &[f64]| {
                v.iter().enumerate().fold(
                    (0, f64::MIN),
                    |acc, (t, &x)| if x > acc.1 { (t, x) } else { acc },
                )
            };
            let (tc, pc) = argmax(&classical.i);
            let (tb, pb) = argmax(&delayed.i);
            assert!(pb < pc, "{pmf:?}: peak {pb} vs {pc}");
            assert!(tb > tc, "{pmf:?}: peak time {tb} vs {tc}");
        }
    }

    #[test]
    fn increment_disjoint_mass_accounting() {
        let p = table_ii();
        let dist = ttd(0.3, 0.7);
        let delay = DelayModel {
            kernel: TransmissionKernel::from_distribution(&dist, PmfConvention::CdfIncrement),
            time_scale: 15,
            windows: WindowConvention::Disjoint,
        };
        let windows = delay.kernel.window_masses(15, WindowConvention::Disjoint);
        let total: f64 = windows.iter().sum();
        assert!(total <= dist.success_probability() + 1e-12);
        let s = blockchain_sir_run(&p, &delay, 500).unwrap();
        let contacts: f64 = (0..500).map(|t| p.beta * s.s[t] * s.i[t]).sum();
        let outflow = s.s[0] - s.s[500];
        assert!(outflow <= contacts * total + 1e-9);
    }
}

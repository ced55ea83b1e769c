//! Severity measures on realised trajectories.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::series::SirSeries;

/// `-(S(t+1) - S(t)) / (S(t) I(t))`.
pub fn empirical_contact_rate(series: &SirSeries, t: usize) -> Result<f64> {
    let denom = series.s.get(t).zip(series.i.get(t)).map(|(s, i)| s * i);
    match (denom, series.s.get(t + 1)) {
        (Some(d), Some(&next)) if d > 0.0 => Ok(-(next - series.s[t]) / d),
        _ => Err(Error::UndefinedRate("contact", t)),
    }
}

/// `(R(t+1) - R(t)) / I(t)`.
pub fn empirical_recovery_rate(series: &SirSeries, t: usize) -> Result<f64> {
    match (series.i.get(t), series.r.get(t + 1)) {
        (Some(&i), Some(&next)) if i > 0.0 => Ok((next - series.r[t]) / i),
        _ => Err(Error::UndefinedRate("recovery", t)),
    }
}

/// `lambda(t) = beta(t) / alpha(t)` at every step where both rates exist and
/// the recovery rate is positive. Undefined steps are omitted.
pub fn effective_infection_rate(series: &SirSeries) -> Vec<(usize, f64)> {
    (0..series.len())
        .filter_map(|t| {
            let b = empirical_contact_rate(series, t).ok()?;
            let a = empirical_recovery_rate(series, t).ok()?;
            (a > 0.0).then(|| (t, b / a))
        })
        .collect()
}

/// Earliest step of maximal `I`.
pub fn peak_step(series: &SirSeries) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (t, &i) in series.i.iter().enumerate() {
        if best.is_none_or(|(_, b)| i > b) {
            best = Some((t, i));
        }
    }
    best.map(|(t, _)| t)
}

/// `N / S(t*)` with `t*` the earliest peak of `I`; `+inf` when `S(t*) = 0`.
pub fn reproduction_number(series: &SirSeries) -> Result<f64> {
    let t = peak_step(series).ok_or_else(|| Error::domain("trajectory", "empty"))?;
    let s = series.s[t];
    if s <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(series.population(t) / s)
}

/// Per-step rates and scalar summaries of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub beta_emp: Vec<Option<f64>>,
    pub alpha_emp: Vec<Option<f64>>,
    pub lambda: Vec<Option<f64>>,
    pub t_star: usize,
    pub r0: f64,
}

impl MetricSeries {
    pub fn compute(series: &SirSeries) -> Result<Self> {
        let steps = series.len().saturating_sub(1);
        let beta_emp: Vec<_> = (0..steps)
            .map(|t| empirical_contact_rate(series, t).ok())
            .collect();
        let alpha_emp: Vec<_> = (0..steps)
            .map(|t| empirical_recovery_rate(series, t).ok())
            .collect();
        let lambda = beta_emp
            .iter()
            .zip(&alpha_emp)
            .map(|(b, a)| match (b, a) {
                (Some(b), Some(a)) if *a > 0.0 => Some(b / a),
                _ => None,
            })
            .collect();
        Ok(Self {
            beta_emp,
            alpha_emp,
            lambda,
            t_star: peak_step(series).ok_or_else(|| Error::domain("trajectory", "empty"))?,
            r0: reproduction_number(series)?,
        })
    }

    /// Mean of the defined `lambda(t)` values.
    pub fn mean_lambda(&self) -> Option<f64> {
        let defined: Vec<f64> = self.lambda.iter().flatten().copied().collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Sample mean and standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Paired t-test of `H1: mean(a - b) < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub mean_difference: f64,
    pub stderr: f64,
    pub t: f64,
    pub p_value: f64,
}

pub fn paired_less_test(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::domain("pairs", "need at least two"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, se) = mean_and_stderr(&diffs);
    let (t, p_value) = if se > 0.0 {
        let t = mean / se;
        let dist = StudentsT::new(0.0, 1.0, (diffs.len() - 1) as f64)
            .map_err(|e| Error::domain("t-test", e.to_string()))?;
        (t, dist.cdf(t))
    } else if mean < 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (f64::NAN, 1.0)
    };
    Ok(PairedTest {
        mean_difference: mean,
        stderr: se,
        t,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(s: &[f64], i: &[f64], r: &[f64]) -> SirSeries {
        SirSeries {
            s: s.to_vec(),
            i: i.to_vec(),
            r: r.to_vec(),
        }
    }

    #[test]
    fn contact_rate_examples() {
        let x = series(&[100.0, 95.0], &[10.0, 15.0], &[0.0, 0.0]);
        assert!((empirical_contact_rate(&x, 0).unwrap() - 0.005).abs() < 1e-15);
        let flat = series(&[50.0, 50.0], &[3.0, 3.0], &[0.0, 0.0]);
        assert_eq!(empirical_contact_rate(&flat, 0).unwrap(), 0.0);
        let dead = series(&[50.0, 50.0], &[0.0, 0.0], &[3.0, 3.0]);
        assert_eq!(
            empirical_contact_rate(&dead, 0),
            Err(Error::UndefinedRate("contact", 0))
        );
        assert!(empirical_contact_rate(&x, 1).is_err());
    }

    #[test]
    fn recovery_rate_examples() {
        let x = series(&[90.0, 90.0], &[10.0, 9.0], &[0.0, 1.0]);
        assert!((empirical_recovery_rate(&x, 0).unwrap() - 0.1).abs() < 1e-15);
        let flat = series(&[90.0, 90.0], &[10.0, 10.0], &[0.0, 0.0]);
        assert_eq!(empirical_recovery_rate(&flat, 0).unwrap(), 0.0);
        let dead = series(&[90.0, 90.0], &[0.0, 0.0], &[10.0, 10.0]);
        assert!(empirical_recovery_rate(&dead, 0).is_err());
    }

    #[test]
    fn lambda_constant_ratio() {
        // beta(t) = 0.002 and alpha(t) = 0.001 at both steps.
        let s = [100.0, 98.0, 98.0 - 0.002 * 98.0 * 11.99];
        let i = [10.0, 11.99, 1.0];
        let r = [0.0, 0.01, 0.01 + 0.001 * 11.99];
        let x = series(&s, &i, &r);
        let lam = effective_infection_rate(&x);
        assert_eq!(lam.len(), 2);
        for (_, l) in lam {
            assert!((l - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_skips_zero_recovery() {
        let x = series(&[100.0, 98.0], &[10.0, 12.0], &[0.0, 0.0]);
        assert!(effective_infection_rate(&x).is_empty());
    }

    #[test]
    fn reproduction_number_cases() {
        let none = series(&[9.0, 9.0, 9.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]);
        assert!((reproduction_number(&none).unwrap() - 10.0 / 9.0).abs() < 1e-15);
        let all = series(&[5.0, 0.0, 0.0], &[5.0, 10.0, 2.0], &[0.0, 0.0, 8.0]);
        assert_eq!(reproduction_number(&all).unwrap(), f64::INFINITY);
        // Ties go to the earliest peak.
        let tie = series(&[8.0, 6.0, 4.0], &[2.0, 2.0, 2.0], &[0.0, 2.0, 4.0]);
        assert_eq!(peak_step(&tie), Some(0));
        assert!(reproduction_number(&SirSeries::default()).is_err());
    }

    #[test]
    fn metric_series_gaps() {
        let x = series(&[9.0, 8.0, 8.0], &[1.0, 1.0, 0.0], &[0.0, 1.0, 2.0]);
        let m = MetricSeries::compute(&x).unwrap();
        assert_eq!(m.beta_emp, vec![Some(1.0 / 9.0), Some(0.0)]);
        assert_eq!(m.alpha_emp, vec![Some(1.0), Some(1.0)]);
        assert_eq!(m.lambda.len(), 2);
        assert_eq!(m.t_star, 0);
    }

    #[test]
    fn paired_test_direction() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 2.5, 4.5, 5.0];
        let t = paired_less_test(&a, &b).unwrap();
        assert!(t.mean_difference < 0.0 && t.p_value < 0.05);
        let back = paired_less_test(&b, &a).unwrap();
        assert!((t.p_value + back.p_value - 1.0).abs() < 1e-12);
        assert!(paired_less_test(&a, &b[..3]).is_err());
    }
}

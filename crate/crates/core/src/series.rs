use serde::{Deserialize, Serialize};

/// Susceptible / infected / recovered counts per time step.
///
/// Counts are real-valued so agent-based and mean-field trajectories share
/// one representation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SirSeries {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

impl SirSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            s: Vec::with_capacity(n),
            i: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, s: f64, i: f64, r: f64) {
        self.s.push(s);
        self.i.push(i);
        self.r.push(r);
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `S + I + R` at step `t`.
    pub fn population(&self, t: usize) -> f64 {
        self.s[t] + self.i[t] + self.r[t]
    }

    pub fn peak_infected(&self) -> f64 {
        self.i.iter().copied().fold(0.0, f64::max)
    }

    /// Copy of the first `len` steps.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self {
            s: self.s[..len].to_vec(),
            i: self.i[..len].to_vec(),
            r: self.r[..len].to_vec(),
        }
    }
}

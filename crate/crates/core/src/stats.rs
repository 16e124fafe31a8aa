//! Mergeable running means for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

use crate::model::LatencyBreakdown;

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Normal-approximation 95% half-width of the mean.
    pub fn ci95(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        1.96 * (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::default();
        iter.into_iter().for_each(|x| r.push(x));
        r
    }
}

/// Per-phase running means of a latency estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LatencyStats {
    pub comp: Running,
    pub dec: Running,
    pub comm: Running,
    pub total: Running,
}

impl LatencyStats {
    pub fn push(&mut self, l: &LatencyBreakdown) {
        self.comp.push(l.comp);
        self.dec.push(l.dec);
        self.comm.push(l.comm);
        self.total.push(l.total);
    }

    pub fn merge(&mut self, other: &Self) {
        self.comp.merge(&other.comp);
        self.dec.merge(&other.dec);
        self.comm.merge(&other.comm);
        self.total.merge(&other.total);
    }

    pub fn mean(&self, psi: f64) -> LatencyBreakdown {
        LatencyBreakdown::new(self.comp.mean(), self.dec.mean(), self.comm.mean(), psi)
    }

    /// 95% half-width of the mean total, normalized by `psi`.
    pub fn ci95_normalized(&self, psi: f64) -> f64 {
        self.total.ci95() / psi
    }
}

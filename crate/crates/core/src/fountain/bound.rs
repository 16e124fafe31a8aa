use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::soliton::DegreeDistribution;
use crate::error::{Error, Result};

/// Below this size Krawtchouk values are evaluated exactly.
const EXACT_LIMIT: usize = 64;

/// Krawtchouk polynomial `K_d(i; k)` over GF(q), by its defining sum.
pub fn krawtchouk(k: usize, d: usize, i: usize, q: u64) -> BigInt {
    let binom = |n: usize, r: usize| -> BigInt {
        if r > n {
            return BigInt::zero();
        }
        let mut acc = BigInt::one();
        for t in 0..r {
            acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
        }
        acc
    };
    let qm1 = BigInt::from(q - 1);
    let mut sum = BigInt::zero();
    for j in 0..=d.min(i) {
        let term = qm1.pow((d - j) as u32) * binom(i, j) * binom(k - i, d - j);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// `S(i) = sum_d Omega_d K_d(i) / K_d(0)` for `i = 0..=k`.
fn weighted_ratios(k: usize, q: u64, dist: &DegreeDistribution) -> Vec<f64> {
    let mut s = vec![0.0; k + 1];
    let support: Vec<(usize, f64)> = (1..=dist.k().min(k)).map(|d| (d, dist.pmf(d))).filter(|&(_, w)| w > 0.0).collect();
    if k <= EXACT_LIMIT {
        for &(d, w) in &support {
            let h0 = krawtchouk(k, d, 0, q);
            for (i, si) in s.iter_mut().enumerate() {
                let r = BigRational::new(krawtchouk(k, d, i, q), h0.clone());
                *si += w * r.to_f64().unwrap_or(0.0);
            }
        }
    } else if q == 2 {
        // Forward recurrence in i is stable up to k/2; reflect above.
        let half = k / 2;
        let kf = k as f64;
        let mut r = vec![0.0; half + 1];
        for &(d, w) in &support {
            r[0] = 1.0;
            let mut prev = 0.0;
            for i in 0..half {
                let next = ((kf - 2.0 * d as f64) * r[i] - i as f64 * prev) / (kf - i as f64);
                prev = r[i];
                r[i + 1] = next;
            }
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..=k {
                s[i] += w * if i <= half { r[i] } else { sign * r[k - i] };
            }
        }
    } else {
        let x = -1.0 / (q - 1) as f64;
        for &(d, w) in &support {
            for (i, si) in s.iter_mut().enumerate() {
                *si += w * hypergeometric_moment(k, i, d, x);
            }
        }
    }
    s
}

/// `E[x^J]` for `J ~ Hypergeometric(k, i, d)`, summed outward from the mode
/// and truncated once terms become negligible.
fn hypergeometric_moment(k: usize, i: usize, d: usize, x: f64) -> f64 {
    let lo = d.saturating_sub(k - i);
    let hi = i.min(d);
    let mode = (((d + 1) * (i + 1)) / (k + 2)).clamp(lo, hi);
    let ratio = |j: usize| -> f64 {
        // P(j + 1) / P(j)
        ((i - j) as f64 * (d - j) as f64) / ((j + 1) as f64 * (k - i + j + 1 - d) as f64)
    };
    let mut total = x.powi(mode as i32);
    let mut mass = 1.0;
    let mut p = 1.0;
    for j in mode..hi {
        p *= ratio(j);
        if p < 1e-300 {
            break;
        }
        mass += p;
        total += p * x.powi((j + 1) as i32);
        if p < 1e-20 * mass {
            break;
        }
    }
    p = 1.0;
    for j in (lo..mode).rev() {
        p /= ratio(j);
        if p < 1e-300 {
            break;
        }
        mass += p;
        total += p * x.powi(j as i32);
        if p < 1e-20 * mass {
            break;
        }
    }
    total / mass
}

/// Union bound on the ML decoding failure probability of a random LT code,
/// precomputed for one `(k, q, Omega)` and evaluated at any overhead.
#[derive(Clone, Debug)]
pub struct FailureBound {
    k: usize,
    /// `ln C(k, i) + (i - 1) ln(q - 1)`, index `i - 1`.
    log_weight: Vec<f64>,
    bracket: Vec<f64>,
}

impl FailureBound {
    pub fn new(k: usize, q: u64, dist: &DegreeDistribution) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!("field order q = {q} must be at least 2")));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        let s = weighted_ratios(k, q, dist);
        let qf = q as f64;
        let ln_qm1 = (qf - 1.0).ln();
        let mut log_weight = Vec::with_capacity(k);
        let mut log_binom = 0.0;
        for i in 1..=k {
            log_binom += ((k - i + 1) as f64).ln() - (i as f64).ln();
            log_weight.push(log_binom + (i - 1) as f64 * ln_qm1);
        }
        let bracket = (1..=k).map(|i| 1.0 / qf + (qf - 1.0) / qf * s[i]).collect();
        Ok(Self { k, log_weight, bracket })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Bound on the failure probability after `k + phi` received rows.
    pub fn at(&self, phi: usize) -> f64 {
        let power = (self.k + phi) as f64;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (lw, &b) in self.log_weight.iter().zip(&self.bracket) {
            if b == 0.0 {
                continue;
            }
            let mag = (lw + power * b.abs().ln()).exp();
            let term = if b < 0.0 && (self.k + phi) % 2 == 1 { -mag } else { mag };
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum.clamp(0.0, 1.0)
    }

    /// Smallest overhead whose bound does not exceed `target`, searching up
    /// to `max_phi`.
    pub fn min_overhead(&self, target: f64, max_phi: usize) -> Option<usize> {
        let (mut lo, mut hi) = (0, max_phi);
        if self.at(hi) > target {
            return None;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.at(mid) <= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// `min(1, sum_i C(k,i)(q-1)^(i-1) [1/q + (q-1)/q sum_d Omega_d K_d(i)/K_d(0)]^(k+phi))`.
pub fn failure_bound(k: usize, phi: usize, q: u64, dist: &DegreeDistribution) -> Result<f64> {
    Ok(FailureBound::new(k, q, dist)?.at(phi))
}

//! System constants, scheme designs and the derived compute-time constants.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact code rate (outer straggler-code rate or replication rate).
pub type Rate = Ratio<u64>;

/// Slack used when comparing an integer row count against the real-valued
/// storage budget `e * mu * k`.
const STORAGE_TOL: f64 = 1e-9;

/// Physical and system constants of the edge network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of edge nodes.
    pub e: usize,
    /// Number of users.
    pub u: usize,
    /// Rows of `W`.
    pub k: usize,
    /// Columns of `W`.
    pub r: usize,
    /// Per-node storage, normalized by `k`.
    pub mu: f64,
    /// Mean straggling time in seconds.
    pub beta: f64,
    /// Per-node transmission rate in bit/s.
    pub nu: f64,
    /// Clock frequency in Hz.
    pub f_cpu: f64,
    /// Cores per edge node.
    pub n_e: usize,
    /// Cores per user device.
    pub n_u: usize,
    /// Field order.
    pub q: u64,
}

impl SystemParams {
    /// The reference operating point used for the reference sweeps, with a
    /// square `k x k` model matrix.
    pub fn reference(k: usize) -> Self {
        Self {
            e: 5,
            u: 10,
            k,
            r: k,
            mu: 0.6,
            beta: 0.03,
            nu: 1e8,
            f_cpu: 2.7e9,
            n_e: 50,
            n_u: 2,
            q: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(problems.join("; ")))
        }
    }

    /// Every violated constraint, in a fixed order.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("e", self.e),
            ("u", self.u),
            ("k", self.k),
            ("r", self.r),
            ("n_e", self.n_e),
            ("n_u", self.n_u),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be at least 1"));
            }
        }
        if self.e > self.u {
            problems.push("e must not exceed u".to_string());
        }
        for (name, v) in [("beta", self.beta), ("nu", self.nu), ("f_cpu", self.f_cpu)] {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("{name} must be positive and finite"));
            }
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            problems.push("mu must lie in (0, 1]".to_string());
        } else if self.mu * self.e as f64 + STORAGE_TOL < 1.0 {
            problems.push(format!(
                "storage infeasible: mu*k = {} is below k/e = {}",
                self.mu * self.k as f64,
                self.k as f64 / self.e as f64
            ));
        }
        if !is_prime_power(self.q) {
            problems.push(format!("q = {} is not a prime power", self.q));
        }
        problems
    }

    /// Real-valued per-node storage `mu * k`, in coded rows.
    pub fn storage_rows(&self) -> f64 {
        self.mu * self.k as f64
    }

    /// Largest integer number of coded rows (over all nodes) that respects
    /// the storage constraint.
    pub fn max_total_rows(&self) -> u64 {
        (self.e as f64 * self.mu * self.k as f64 + STORAGE_TOL).floor() as u64
    }

    pub fn log2_q(&self) -> f64 {
        (self.q as f64).log2()
    }

    /// `u * log2(q) / nu`: time to push one length-`u` product through a
    /// single spatial stream.
    pub fn comm_unit(&self) -> f64 {
        self.u as f64 * self.log2_q() / self.nu
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, r: k, ..self.clone() }
    }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut m = q;
            while m % p == 0 {
                m /= p;
            }
            return m == 1;
        }
        p += 1;
    }
    true
}

/// Time for one edge node to compute one product `c^T X`:
/// `u(r-1)` additions plus `u r` multiplications.
pub fn delta(params: &SystemParams) -> f64 {
    let u = params.u as f64;
    let r = params.r as f64;
    (u * (r - 1.0) + u * r) / (params.n_e as f64 * params.f_cpu)
}

/// Local computation latency: the time a user needs to compute `W x` alone.
pub fn psi(params: &SystemParams) -> f64 {
    let k = params.k as f64;
    let r = params.r as f64;
    k * (2.0 * r - 1.0) / (params.n_u as f64 * params.f_cpu)
}

/// The three coding schemes, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    RatelessIr,
    MdsIr,
    MdsR,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::RatelessIr, Scheme::MdsIr, Scheme::MdsR];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RatelessIr => "rateless-ir",
            Scheme::MdsIr => "mds-ir",
            Scheme::MdsR => "mds-r",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s.trim().to_ascii_lowercase())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the final decoding step runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    User,
    Edge,
}

impl Decoder {
    pub const BOTH: [Decoder; 2] = [Decoder::User, Decoder::Edge];

    pub fn name(self) -> &'static str {
        match self {
            Decoder::User => "user",
            Decoder::Edge => "edge",
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outer (straggler-code) rate and replication rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rates {
    pub outer: Rate,
    pub replication: Rate,
}

impl Rates {
    pub fn new(outer: Rate, replication: Rate) -> Result<Self> {
        for (name, r) in [("outer", outer), ("replication", replication)] {
            if r.is_zero() || r > Rate::one() {
                return Err(Error::InvalidDesign(format!("{name} rate {r} not in (0, 1]")));
            }
        }
        Ok(Self { outer, replication })
    }

    /// Rates from row counts: `distinct = k / Ro` coded rows, replicated to
    /// `total = k / (Ro Ri)` rows overall.
    pub fn from_counts(k: u64, distinct: u64, total: u64) -> Result<Self> {
        if k == 0 || distinct < k || total < distinct {
            return Err(Error::InvalidDesign(format!(
                "row counts must satisfy 0 < k <= distinct <= total, got k={k}, distinct={distinct}, total={total}"
            )));
        }
        Self::new(Rate::new(k, distinct), Rate::new(distinct, total))
    }

    /// `k / Ro`, when integral.
    pub fn distinct_rows(&self, k: u64) -> Option<u64> {
        integral(Rate::from_integer(k) / self.outer)
    }

    /// `k / (Ro Ri)`, when integral.
    pub fn total_rows(&self, k: u64) -> Option<u64> {
        integral(Rate::from_integer(k) / (self.outer * self.replication))
    }

    /// `k / (e Ro Ri)`, when integral.
    pub fn rows_per_node(&self, k: u64, e: u64) -> Option<u64> {
        integral(Rate::from_integer(k) / (self.outer * self.replication * Rate::from_integer(e)))
    }

    /// `1 / Ri`, when integral.
    pub fn replication_factor(&self) -> Option<u64> {
        integral(self.replication.recip())
    }

    pub fn is_pure_replication(&self) -> bool {
        self.outer.is_one()
    }
}

fn integral(r: Rate) -> Option<u64> {
    r.is_integer().then(|| r.to_integer())
}

/// Formats a rate as `a/b`, or `1` when it is one.
pub fn format_rate(r: Rate) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The best approximation of `x` with denominator at most `max_den`.
///
/// Used to compare optimizer outputs with rates quoted as simple fractions.
pub fn simple_fraction(x: f64, max_den: u64) -> Rate {
    let mut best = Rate::new(x.round().max(0.0) as u64, 1);
    let mut best_err = (x - best.to_f64().unwrap_or(0.0)).abs();
    for den in 1..=max_den {
        let num = (x * den as f64).round().max(0.0) as u64;
        let cand = Rate::new(num, den);
        let err = (x - cand.to_f64().unwrap_or(0.0)).abs();
        if err + 1e-15 < best_err {
            best = cand;
            best_err = err;
        }
    }
    best
}

/// Parameters of the LT straggler code used by the rateless scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtParams {
    /// Provisioned overhead: the scheme waits for `k + overhead` distinct products.
    pub overhead: usize,
    /// Robust-Soliton spike location.
    pub gamma: usize,
    /// Robust-Soliton failure parameter.
    pub zeta: f64,
    /// Target decoding-failure probability at the provisioned overhead.
    pub target_failure: f64,
}

impl LtParams {
    /// Overhead such that `k + overhead = 2 mu k` distinct products are
    /// collected (two full nodes' worth).
    pub fn default_overhead(params: &SystemParams) -> usize {
        let two_nodes = (2.0 * params.storage_rows()).floor() as usize;
        two_nodes.saturating_sub(params.k)
    }
}

/// A coding scheme together with its design parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeDesign {
    /// LT outer code plus irregular repetition; stops once `k + overhead`
    /// distinct and at least `min_products` total products are available.
    RatelessIr { rates: Rates, min_products: usize, lt: LtParams },
    /// MDS outer code plus irregular repetition; stops once `k` distinct and
    /// at least `min_products` total products are available.
    MdsIr { rates: Rates, min_products: usize },
    /// MDS outer code plus regular combinatorial repetition; stops once
    /// `wait_for` nodes have finished their whole queue.
    MdsR { rates: Rates, wait_for: usize },
}

impl SchemeDesign {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeDesign::RatelessIr { .. } => Scheme::RatelessIr,
            SchemeDesign::MdsIr { .. } => Scheme::MdsIr,
            SchemeDesign::MdsR { .. } => Scheme::MdsR,
        }
    }

    pub fn rates(&self) -> Rates {
        match *self {
            SchemeDesign::RatelessIr { rates, .. }
            | SchemeDesign::MdsIr { rates, .. }
            | SchemeDesign::MdsR { rates, .. } => rates,
        }
    }

    /// `p` for the irregular-repetition schemes, `xi` for MDS-R.
    pub fn threshold(&self) -> usize {
        match *self {
            SchemeDesign::RatelessIr { min_products, .. } | SchemeDesign::MdsIr { min_products, .. } => {
                min_products
            }
            SchemeDesign::MdsR { wait_for, .. } => wait_for,
        }
    }

    /// Number of distinct products the stopping rule waits for (irregular
    /// schemes only).
    pub fn distinct_target(&self, k: usize) -> Option<usize> {
        match *self {
            SchemeDesign::RatelessIr { rates, lt, .. } => {
                Some(if rates.is_pure_replication() { k } else { k + lt.overhead })
            }
            SchemeDesign::MdsIr { .. } => Some(k),
            SchemeDesign::MdsR { .. } => None,
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let k = params.k as u64;
        let e = params.e as u64;
        let rates = self.rates();
        let bad = |m: String| Err(Error::InvalidDesign(m));
        let Some(distinct) = rates.distinct_rows(k) else {
            return bad(format!("k/Ro = {k}/{} is not an integer", rates.outer));
        };
        let Some(total) = rates.total_rows(k) else {
            return bad("k/(Ro Ri) is not an integer".into());
        };
        if total > params.max_total_rows() {
            return bad(format!(
                "storage constraint violated: {total} rows over {e} nodes exceeds mu*k = {} per node",
                params.storage_rows()
            ));
        }
        match *self {
            SchemeDesign::RatelessIr { min_products, lt, .. } => {
                check_cyclic_shape(distinct, total, e)?;
                let need = self.distinct_target(params.k).unwrap_or(params.k);
                if need as u64 > distinct {
                    return bad(format!("distinct target {need} exceeds the {distinct} coded rows"));
                }
                if min_products < need || min_products as u64 > total {
                    return bad(format!("p = {min_products} outside [{need}, {total}]"));
                }
                if !(lt.target_failure > 0.0 && lt.target_failure <= 1.0) {
                    return bad("target failure probability must lie in (0, 1]".into());
                }
                if lt.gamma == 0 || lt.gamma > params.k || !(lt.zeta > 0.0 && lt.zeta < 1.0) {
                    return bad("robust Soliton needs 1 <= gamma <= k and 0 < zeta < 1".into());
                }
            }
            SchemeDesign::MdsIr { min_products, .. } => {
                check_cyclic_shape(distinct, total, e)?;
                if min_products < params.k || min_products as u64 > total {
                    return bad(format!("p = {min_products} outside [{}, {total}]", params.k));
                }
            }
            SchemeDesign::MdsR { wait_for, .. } => {
                let Some(rep) = rates.replication_factor() else {
                    return bad(format!("1/Ri = {} is not an integer", rates.replication.recip()));
                };
                if rep > e {
                    return bad(format!("1/Ri = {rep} exceeds e = {e}"));
                }
                let batches = binomial(e, rep);
                if distinct % batches != 0 {
                    return bad(format!("C(e, 1/Ri) = {batches} does not divide k/Ro = {distinct}"));
                }
                if wait_for == 0 || wait_for as u64 > e {
                    return bad(format!("xi = {wait_for} outside [1, {e}]"));
                }
            }
        }
        Ok(())
    }
}

fn check_cyclic_shape(distinct: u64, total: u64, e: u64) -> Result<()> {
    if distinct % e != 0 || total % e != 0 {
        return Err(Error::InvalidDesign(format!(
            "k/(e Ro) = {distinct}/{e} and k/(e Ro Ri) = {total}/{e} must both be integers"
        )));
    }
    Ok(())
}

/// Exact binomial coefficient; zero when `j > n`.
pub fn binomial(n: u64, j: u64) -> u64 {
    if j > n {
        return 0;
    }
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Per-phase latencies of one scheme, in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub comp: f64,
    pub dec: f64,
    pub comm: f64,
    pub total: f64,
    /// `total / psi`.
    pub normalized: f64,
}

impl LatencyBreakdown {
    pub fn new(comp: f64, dec: f64, comm: f64, psi: f64) -> Self {
        let total = comp + dec + comm;
        Self { comp, dec, comm, total, normalized: total / psi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(u: usize, r: usize, n: usize, f: f64) -> SystemParams {
        SystemParams { u, r, n_e: n, n_u: n, f_cpu: f, ..SystemParams::reference(1) }
    }

    #[test]
    fn delta_examples() {
        let p = SystemParams::reference(10_000);
        assert!((delta(&p) - 199_990.0 / 1.35e11).abs() < 1e-18);
        assert!((delta(&p) - 1.48141e-6).abs() < 1e-10);
        assert_eq!(delta(&small(1, 1, 1, 1.0)), 1.0);
        assert!((delta(&small(2, 3, 1, 10.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let p = SystemParams::reference(10_000);
        assert!((psi(&p) - 10_000.0 * 19_999.0 / 5.4e9).abs() < 1e-15);
        assert!((psi(&p) - 0.0370352).abs() < 1e-7);
        let one = SystemParams { k: 1, ..small(1, 1, 1, 1.0) };
        assert_eq!(psi(&one), 1.0);
        let p5 = psi(&SystemParams::reference(5000));
        assert!((p5 - 5000.0 * 9999.0 / 5.4e9).abs() < 1e-15);
        assert!((p5 / 0.0092588 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn delta_and_psi_scale_monotonically() {
        let base = SystemParams::reference(100);
        let mut last = 0.0;
        for r in [2, 5, 10, 50, 100] {
            let d = delta(&SystemParams { r, ..base.clone() });
            assert!(d > last);
            last = d;
        }
        let mut last = 0.0;
        for k in [1, 10, 100, 1000] {
            let p = psi(&SystemParams { k, ..base.clone() });
            assert!(p > last);
            last = p;
        }
        let d1 = delta(&base);
        let d2 = delta(&SystemParams { n_e: base.n_e * 2, ..base.clone() });
        let d3 = delta(&SystemParams { f_cpu: base.f_cpu * 4.0, ..base.clone() });
        assert!((d1 / d2 - 2.0).abs() < 1e-12);
        assert!((d1 / d3 - 4.0).abs() < 1e-12);
        let p1 = psi(&base);
        let p2 = psi(&SystemParams { n_u: base.n_u * 3, ..base.clone() });
        assert!((p1 / p2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn params_validation_collects_every_problem() {
        let mut p = SystemParams::reference(100);
        p.e = 20;
        p.beta = 0.0;
        p.q = 6;
        let Err(Error::InvalidParams(msg)) = p.validate() else { panic!() };
        assert!(msg.contains("e must not exceed u"));
        assert!(msg.contains("beta"));
        assert!(msg.contains("prime power"));

        let p = SystemParams { mu: 0.1, ..SystemParams::reference(100) };
        let Err(Error::InvalidParams(msg)) = p.validate() else { panic!() };
        assert!(msg.contains("storage infeasible"));
        assert!(SystemParams::reference(100).validate().is_ok());
    }

    #[test]
    fn rates_are_exact() {
        let r = Rates::from_counts(10_000, 30_000, 30_000).unwrap();
        assert_eq!(r.outer, Rate::new(1, 3));
        assert_eq!(r.rows_per_node(10_000, 5), Some(6000));
        let r = Rates::new(Rate::new(3, 4), Rate::new(2, 5)).unwrap();
        assert_eq!(r.distinct_rows(15), Some(20));
        assert_eq!(r.total_rows(15), Some(50));
        assert_eq!(r.rows_per_node(15, 5), Some(10));
        assert_eq!(r.replication_factor(), None);
        assert_eq!(r.distinct_rows(14), None);
        assert!(Rates::new(Rate::new(4, 3), Rate::one()).is_err());
    }

    #[test]
    fn design_validation() {
        let p = SystemParams::reference(10_000);
        let lt = LtParams { overhead: 2000, gamma: 210, zeta: 1e-4, target_failure: 1e-5 };
        let rir = SchemeDesign::RatelessIr {
            rates: Rates::from_counts(10_000, 30_000, 30_000).unwrap(),
            min_products: 12_000,
            lt,
        };
        assert!(rir.validate(&p).is_ok());
        let too_big = SchemeDesign::MdsIr {
            rates: Rates::from_counts(10_000, 30_000, 30_005).unwrap(),
            min_products: 10_000,
        };
        assert!(matches!(too_big.validate(&p), Err(Error::InvalidDesign(m)) if m.contains("storage")));
        let mdsr = SchemeDesign::MdsR { rates: Rates::from_counts(5000, 7150, 14_300).unwrap(), wait_for: 2 };
        assert!(mdsr.validate(&p.with_k(5000)).is_ok());
        let bad = SchemeDesign::MdsR { rates: Rates::from_counts(5000, 7145, 14_290).unwrap(), wait_for: 2 };
        assert!(bad.validate(&p.with_k(5000)).is_err());
    }

    #[test]
    fn default_overhead_collects_two_nodes() {
        let p = SystemParams::reference(10_000);
        assert_eq!(LtParams::default_overhead(&p), 2000);
    }

    #[test]
    fn simple_fractions() {
        assert_eq!(simple_fraction(5000.0 / 7150.0, 10), Rate::new(7, 10));
        assert_eq!(simple_fraction(1.0 / 3.0, 10), Rate::new(1, 3));
        assert_eq!(simple_fraction(1.0, 10), Rate::one());
        assert_eq!(format_rate(Rate::new(2, 6)), "1/3");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }
}

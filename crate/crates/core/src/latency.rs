//! Per-phase latencies: communication for both decoding placements, decoding
//! time from operation counts, and the closed forms of the regular-repetition
//! baseline.

use crate::error::{Error, Result};
use crate::fountain::MeanDecodeCost;
use crate::mds::bm_ops;
use crate::model::{binomial, psi, Decoder, LatencyBreakdown, Rate, SchemeDesign, SystemParams};
use crate::runtime::TrialSummary;

/// Downlink time when the users decode: products go out one after another,
/// each over as many parallel streams as nodes holding it.
pub fn comm_user(retained_diversities: &[usize], u: usize, q: u64, nu: f64) -> Result<f64> {
    if retained_diversities.contains(&0) {
        return Err(Error::ZeroDiversity);
    }
    let unit = u as f64 * (q as f64).log2() / nu;
    Ok(unit * retained_diversities.iter().map(|&m| 1.0 / m as f64).sum::<f64>())
}

/// Downlink time when `m` nodes decode and jointly send `k` products.
pub fn comm_edge(k: usize, u: usize, q: u64, nu: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::NoActiveNodes);
    }
    Ok(u as f64 * k as f64 * (q as f64).log2() / (nu * m as f64))
}

/// `(N_a + N_m) / (cores f_cpu)`.
pub fn decode_latency(n_a: f64, n_m: f64, cores: usize, f_cpu: f64) -> f64 {
    (n_a + n_m) / (cores as f64 * f_cpu)
}

/// `h(n) = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

/// Expected time until `xi` of `e` nodes have emptied queues of length
/// `k/(e Ro Ri)`.
pub fn mdsr_expected_lc(xi: usize, e: usize, beta: f64, rows_per_node: usize, delta: f64) -> f64 {
    beta * (harmonic(e) - harmonic(e - xi)) + rows_per_node as f64 * delta
}

/// Number of distinct products of diversity `m` once `xi` nodes have
/// finished, with replication factor `rep = 1/Ri`.
pub fn mdsr_g(m: usize, xi: usize, e: usize, rep: usize, n1: usize) -> f64 {
    if m > rep || m > xi || rep - m > e - xi {
        return 0.0;
    }
    let (m, xi, e, rep) = (m as u64, xi as u64, e as u64, rep as u64);
    (binomial(xi, m) * binomial(e - xi, rep - m)) as f64 * n1 as f64 / binomial(e, rep) as f64
}

/// Fraction of distinct products held only by the `e - xi` slowest nodes.
pub fn mdsr_f(xi: usize, e: usize, rep: usize) -> f64 {
    let (xi, e, rep) = (xi as u64, e as u64, rep as u64);
    binomial(e - xi, rep) as f64 / binomial(e, rep) as f64
}

/// The `k` needed products are among those computed by the `xi` fastest
/// nodes for every straggler pattern:
/// `C(e, 1/Ri) - C(e - xi, 1/Ri) >= Ro C(e, 1/Ri)`.
pub fn mdsr_decodable(xi: usize, e: usize, rep: usize, outer: Rate) -> bool {
    let (xi, e, rep) = (xi as u64, e as u64, rep as u64);
    let all = binomial(e, rep);
    Rate::from_integer(all - binomial(e - xi, rep)) >= outer * Rate::from_integer(all)
}

/// Average RS decoding additions and multiplications for one vector, or zero
/// for pure replication.
fn bm_count(k: usize, outer: Rate, erased: f64) -> Result<f64> {
    if outer == Rate::from_integer(1) {
        return Ok(0.0);
    }
    let (a, m) = bm_ops(k as u64, outer, erased.clamp(0.0, 1.0))?;
    Ok(a + m)
}

fn decode_time(params: &SystemParams, decoder: Decoder, per_vector: f64, fixed: f64) -> f64 {
    match decoder {
        Decoder::User => decode_latency(fixed + per_vector, 0.0, params.n_u, params.f_cpu),
        Decoder::Edge => decode_latency(fixed + params.u as f64 * per_vector, 0.0, params.n_e, params.f_cpu),
    }
}

/// Latency of one simulated trial.
///
/// `lt_cost` is the mean inactivation-decoding cost and is required for the
/// rateless scheme unless it uses pure repetition.
pub fn trial_latency(
    params: &SystemParams,
    design: &SchemeDesign,
    decoder: Decoder,
    trial: &TrialSummary,
    lt_cost: Option<&MeanDecodeCost>,
) -> Result<LatencyBreakdown> {
    let rates = design.rates();
    let n1 = rates
        .distinct_rows(params.k as u64)
        .ok_or_else(|| Error::NonIntegralShape("k/Ro is not an integer".into()))? as f64;
    let dec = match design {
        SchemeDesign::RatelessIr { .. } if rates.is_pure_replication() => 0.0,
        SchemeDesign::RatelessIr { .. } => {
            let c = lt_cost.ok_or_else(|| Error::InvalidParams("missing LT decoding cost".into()))?;
            decode_time(params, decoder, c.per_vector_ops_add, c.matrix_ops_add)
        }
        SchemeDesign::MdsIr { .. } | SchemeDesign::MdsR { .. } => {
            let erased = 1.0 - trial.distinct as f64 / n1;
            decode_time(params, decoder, bm_count(params.k, rates.outer, erased)?, 0.0)
        }
    };
    let unit = params.comm_unit();
    let comm = match decoder {
        Decoder::User => unit * trial.inv_diversity_sum,
        Decoder::Edge => {
            let m = match design {
                SchemeDesign::MdsR { wait_for, .. } => *wait_for,
                _ => trial.active_nodes,
            };
            comm_edge(params.k, params.u, params.q, params.nu, m)?
        }
    };
    Ok(LatencyBreakdown::new(trial.lc, dec, comm, psi(params)))
}

/// Exact expected latency of an MDS-R design from its closed forms.
pub fn mdsr_totals(params: &SystemParams, design: &SchemeDesign, decoder: Decoder, delta: f64) -> Result<LatencyBreakdown> {
    let SchemeDesign::MdsR { rates, wait_for } = *design else {
        return Err(Error::InvalidDesign("closed forms exist only for MDS-R".into()));
    };
    let k = params.k as u64;
    let e = params.e;
    let n1 = rates.distinct_rows(k).ok_or_else(|| Error::NonIntegralShape("k/Ro is not an integer".into()))? as usize;
    let rep = rates
        .replication_factor()
        .ok_or_else(|| Error::NonIntegralShape("1/Ri is not an integer".into()))? as usize;
    let rows = rates
        .rows_per_node(k, e as u64)
        .ok_or_else(|| Error::NonIntegralShape("k/(e Ro Ri) is not an integer".into()))? as usize;
    if wait_for == 0 || wait_for > e || rep > e {
        return Err(Error::InvalidDesign(format!("xi = {wait_for}, 1/Ri = {rep} with e = {e}")));
    }
    let comp = mdsr_expected_lc(wait_for, e, params.beta, rows, delta);
    let erased = mdsr_f(wait_for, e, rep);
    let dec = decode_time(params, decoder, bm_count(params.k, rates.outer, erased)?, 0.0);
    let comm = match decoder {
        Decoder::User => {
            params.comm_unit() * (1..=e).map(|m| mdsr_g(m, wait_for, e, rep, n1) / m as f64).sum::<f64>()
        }
        Decoder::Edge => comm_edge(params.k, params.u, params.q, params.nu, wait_for)?,
    };
    Ok(LatencyBreakdown::new(comp, dec, comm, psi(params)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{delta, Rates};

    #[test]
    fn comm_user_examples() {
        assert!((comm_user(&[1, 2], 10, 2, 1e8).unwrap() - 1.5e-7).abs() < 1e-20);
        assert!((comm_user(&[5; 20], 10, 2, 1e8).unwrap() - 1e-7 * 20.0 / 5.0).abs() < 1e-20);
        assert_eq!(comm_user(&[], 10, 2, 1e8).unwrap(), 0.0);
        assert!(matches!(comm_user(&[1, 0], 10, 2, 1e8), Err(Error::ZeroDiversity)));
    }

    #[test]
    fn comm_edge_examples() {
        assert!((comm_edge(10_000, 10, 2, 1e8, 5).unwrap() - 2e-4).abs() < 1e-18);
        let one = comm_edge(10_000, 10, 2, 1e8, 1).unwrap();
        assert!((one / 5.0 - 2e-4).abs() < 1e-18);
        assert!((comm_edge(10_000, 10, 4, 1e8, 5).unwrap() - 4e-4).abs() < 1e-18);
        assert!(comm_edge(1, 1, 2, 1.0, 0).is_err());
    }

    #[test]
    fn decode_latency_examples() {
        assert!((decode_latency(108.0, 74.0, 2, 2.7e9) - 182.0 / 5.4e9).abs() < 1e-20);
        assert_eq!(decode_latency(0.0, 0.0, 2, 2.7e9), 0.0);
        let p = SystemParams::reference(10_000);
        let user = decode_time(&p, Decoder::User, 1000.0, 0.0);
        let edge = decode_time(&p, Decoder::Edge, 1000.0, 0.0);
        assert!((user / edge - 2.5).abs() < 1e-12);
    }

    #[test]
    fn mdsr_closed_form_pieces() {
        assert!((mdsr_expected_lc(2, 5, 0.03, 0, 1.0) - 0.0135).abs() < 1e-15);
        assert!((mdsr_expected_lc(5, 5, 0.03, 0, 1.0) - 0.03 * harmonic(5)).abs() < 1e-15);
        let g: Vec<f64> = (0..=3).map(|m| mdsr_g(m, 2, 5, 3, 20)).collect();
        assert_eq!(g, vec![2.0, 12.0, 6.0, 0.0]);
        assert_eq!((0..=5).map(|m| mdsr_g(m, 5, 5, 3, 20)).collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 20.0, 0.0, 0.0]);
        for xi in 0..=5 {
            for rep in 1..=5 {
                let s: f64 = (0..=5).map(|m| mdsr_g(m, xi, 5, rep, 120)).sum();
                assert!((s - 120.0).abs() < 1e-9);
            }
        }
        assert!((mdsr_f(2, 5, 3) - 0.1).abs() < 1e-15);
        assert_eq!(mdsr_f(5, 5, 3), 0.0);
        assert_eq!(mdsr_f(0, 5, 3), 1.0);
    }

    #[test]
    fn mdsr_decodability_uses_replication_sets() {
        // (xi = 2, Ro = 7/10, 1/Ri = 2): 10 - 3 = 7 >= 7.
        assert!(mdsr_decodable(2, 5, 2, Rate::new(7, 10)));
        assert!(!mdsr_decodable(2, 5, 2, Rate::new(8, 10)));
        // Pure replication needs every batch covered.
        assert!(mdsr_decodable(3, 5, 3, Rate::new(1, 1)));
        assert!(!mdsr_decodable(2, 5, 3, Rate::new(1, 1)));
    }

    #[test]
    fn mdsr_totals_match_hand_evaluation() {
        let p = SystemParams::reference(10_000);
        let rates = Rates::from_counts(10_000, 14_300, 28_600).unwrap();
        let design = SchemeDesign::MdsR { rates, wait_for: 2 };
        let d = delta(&p);
        let got = mdsr_totals(&p, &design, Decoder::User, d).unwrap();

        let comp = 0.03 * (1.0 / 4.0 + 1.0 / 5.0) + 5720.0 * d;
        let f = 3.0 / 10.0;
        let eta = 14.0f64;
        let n1 = 14_300.0f64;
        let na = 2f64.powf(eta - 1.0) * (3.0 * eta - 5.0) + 4.0 + n1 * n1 * f - n1;
        let nm = 2f64.powf(eta - 1.0) * (eta - 3.0) + 2.0 + n1 * n1 * f;
        let dec = (na + nm) / (2.0 * 2.7e9);
        // g(1) = 2*3/10 n1 and g(2) = 1/10 n1.
        let comm = 1e-7 * (0.6 * n1 + 0.1 * n1 / 2.0);
        assert!((got.comp - comp).abs() < 1e-15);
        assert!((got.dec - dec).abs() < 1e-12);
        assert!((got.comm - comm).abs() < 1e-15);
        assert!((got.total - (comp + dec + comm)).abs() < 1e-12);
        assert!((got.normalized - got.total / psi(&p)).abs() < 1e-12);
    }

    #[test]
    fn pure_replication_has_no_decoding() {
        let p = SystemParams::reference(10_000);
        let rates = Rates::from_counts(10_000, 10_000, 30_000).unwrap();
        let design = SchemeDesign::MdsIr { rates, min_products: 10_000 };
        let trial = TrialSummary { lc: 0.05, distinct: 10_000, retained: 10_000, inv_diversity_sum: 8000.0, active_nodes: 4, total_products: 12_000 };
        let l = trial_latency(&p, &design, Decoder::User, &trial, None).unwrap();
        assert_eq!(l.dec, 0.0);
        assert!((l.total - (l.comp + l.comm)).abs() < 1e-18);
        let l = trial_latency(&p, &design, Decoder::Edge, &trial, None).unwrap();
        assert!((l.comm - 2.5e-4).abs() < 1e-15);
    }
}

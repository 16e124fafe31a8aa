//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use edgeinfer_core::bounds::{f_bound, lc_lower, ldu_lower};
use edgeinfer_core::fountain::{
    first_decodable_overhead, inactivation_decode, sample_rows, DegreeDistribution, EncodingRow, FailureBound,
};
use edgeinfer_core::latency::{harmonic, mdsr_g};
use edgeinfer_core::model::{delta, Rate};
use edgeinfer_core::placement::{batch_assignment, cyclic_assignment};
use edgeinfer_core::runtime::{draw_stragglers, run_computation};
use edgeinfer_core::search::trial_rng;
use edgeinfer_core::{LtParams, Rates, SchemeDesign, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rates(o: (u64, u64), i: (u64, u64)) -> Rates {
    Rates::new(Rate::new(o.0, o.1), Rate::new(i.0, i.1)).unwrap()
}

/// Rateless example: e=5, k=15, Ro=3/4, Ri=2/5.
pub const GOLDEN_CYCLIC: [[usize; 5]; 10] = [
    [1, 2, 3, 4, 5],
    [6, 7, 8, 9, 10],
    [11, 12, 13, 14, 15],
    [16, 17, 18, 19, 20],
    [2, 3, 4, 5, 1],
    [7, 8, 9, 10, 6],
    [12, 13, 14, 15, 11],
    [17, 18, 19, 20, 16],
    [3, 4, 5, 1, 2],
    [8, 9, 10, 6, 7],
];

/// MDS-R example: e=5, k=15, Ro=3/4, Ri=1/3.
pub const GOLDEN_BATCH: [[usize; 5]; 12] = [
    [1, 1, 1, 3, 5],
    [2, 2, 2, 4, 6],
    [3, 3, 7, 7, 9],
    [4, 4, 8, 8, 10],
    [5, 5, 9, 11, 11],
    [6, 6, 10, 12, 12],
    [7, 13, 13, 13, 15],
    [8, 14, 14, 14, 16],
    [9, 15, 15, 17, 17],
    [10, 16, 16, 18, 18],
    [11, 17, 19, 19, 19],
    [12, 18, 20, 20, 20],
];

fn golden_csv(rows: &[[usize; 5]]) -> String {
    rows.iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

/// Whether both constructions reproduce the reference examples byte for byte.
pub fn golden_matrices_match() -> (bool, bool) {
    let cyc = cyclic_assignment(15, 5, &rates((3, 4), (2, 5))).unwrap();
    let bat = batch_assignment(15, 5, &rates((3, 4), (1, 3))).unwrap();
    (cyc.to_csv() == golden_csv(&GOLDEN_CYCLIC), bat.to_csv() == golden_csv(&GOLDEN_BATCH))
}

/// Rank over GF(2) by plain Gaussian elimination on bitmasks, `k <= 64`.
pub fn gf2_rank(rows: &[EncodingRow], k: usize) -> usize {
    assert!(k <= 64);
    let mut m: Vec<u64> = rows.iter().map(|r| r.neighbors.iter().fold(0u64, |a, &i| a | 1 << i)).collect();
    let mut rank = 0;
    for col in 0..k {
        let Some(p) = (rank..m.len()).find(|&i| m[i] >> col & 1 == 1) else { continue };
        m.swap(rank, p);
        let pivot = m[rank];
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && *row >> col & 1 == 1 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// A random instance for the rank oracle: `k` in `1..=64`, robust-Soliton
/// rows, between `k/2` and `3k/2` of them.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (usize, Vec<EncodingRow>) {
    let k = rng.random_range(1..=64);
    let gamma = rng.random_range(1..=k);
    let zeta = rng.random_range(0.01..0.9);
    let dist = DegreeDistribution::robust_soliton(k, gamma, zeta).unwrap();
    let n = rng.random_range(k.div_ceil(2)..=k + k / 2 + 1);
    (k, sample_rows(&dist, k, n, rng))
}

/// Instances on which the decoder's success flag differs from `rank == k`.
pub fn rank_oracle_disagreements(instances: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instances)
        .filter(|_| {
            let (k, rows) = random_instance(&mut rng);
            inactivation_decode(&rows, k).success != (gf2_rank(&rows, k) == k)
        })
        .count()
}

/// `(phi, bound, empirical)` for `phi = 0..=k/2` from `decodes` random
/// streams; `P_F(phi)` is the fraction of streams not yet decodable after
/// `k + phi` rows.
pub fn failure_bound_vs_empirical(k: usize, gamma: usize, zeta: f64, decodes: usize, seed: u64) -> Vec<(usize, f64, f64)> {
    let dist = DegreeDistribution::robust_soliton(k, gamma, zeta).unwrap();
    let bound = FailureBound::new(k, 2, &dist).unwrap();
    let max_phi = k / 2;
    let mut late = vec![0usize; max_phi + 2];
    for t in 0..decodes {
        let mut rng = trial_rng(seed, t as u64);
        let o = first_decodable_overhead(&dist, k, max_phi, &mut rng).unwrap_or(max_phi + 1);
        late[o] += 1;
    }
    // Streams still failing at phi are those whose first success is later.
    let mut out = Vec::new();
    let mut still = decodes;
    for (phi, &c) in late.iter().enumerate().take(max_phi + 1) {
        still -= c;
        out.push((phi, bound.at(phi), still as f64 / decodes as f64));
    }
    out
}

/// All nondecreasing length-`v` sequences over `1..=e` summing to `p`.
fn multisets(v: usize, e: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, min: usize, e: usize, sum: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for m in min..=e {
            if m * left > sum {
                break;
            }
            if e * left < sum {
                return;
            }
            cur.push(m);
            rec(left - 1, m, e, sum - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(v, 1, e, p, &mut Vec::new(), &mut out);
    out
}

/// Violations of the optimal-diversity claim over `e <= e_max`, `v <= v_max`
/// and every attainable `p`: some multiset beats the bound, the floor/ceil
/// split misses it, or the enumerated minimum differs from it.
pub fn diversity_enumeration_violations(e_max: usize, v_max: usize) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for e in 1..=e_max {
        for v in 1..=v_max {
            for p in v..=e * v {
                let bound = ldu_lower(p, v, 1, 2, 1.0).unwrap();
                let inv = |s: &[usize]| s.iter().map(|&m| 1.0 / m as f64).sum::<f64>();
                let all = multisets(v, e, p);
                let best = all.iter().map(|s| inv(s)).fold(f64::INFINITY, f64::min);
                let (lo, hi) = (p / v, p.div_ceil(v));
                let n_hi = p - lo * v;
                let split: Vec<usize> = (0..v).map(|i| if i < v - n_hi { lo } else { hi }).collect();
                checked += all.len();
                let tol = 1e-12 * bound.max(1.0);
                if all.iter().any(|s| inv(s) < bound - tol)
                    || (inv(&split) - bound).abs() > tol
                    || (best - bound).abs() > tol
                    || split.iter().sum::<usize>() != p
                {
                    bad += 1;
                }
            }
        }
    }
    (checked, bad)
}

/// Monotonicity violations of `f(a, b)`: decreasing in `a` over `[b, 10 b]`
/// and increasing in `b` over `[1, a]`, `points` samples each.
pub fn f_bound_monotonicity_violations(points: usize) -> usize {
    let mut bad = 0;
    for b in [1.0, 2.0, 3.0, 3.5, 7.0, 10.0] {
        let mut prev = f64::INFINITY;
        for i in 0..points {
            let a = b + 9.0 * b * i as f64 / (points - 1) as f64;
            let f = f_bound(a, b).unwrap();
            if f > prev * (1.0 + 1e-12) {
                bad += 1;
            }
            prev = f;
        }
    }
    for a in [10.0, 37.5, 100.0] {
        let mut prev = 0.0;
        for i in 0..points {
            let b = 1.0 + (a - 1.0) * i as f64 / (points - 1) as f64;
            let f = f_bound(a, b).unwrap();
            if f < prev * (1.0 - 1e-12) {
                bad += 1;
            }
            prev = f;
        }
    }
    bad
}

/// Monte Carlo against the closed forms for MDS-R with e=5, xi=2, 1/Ri=3,
/// Ro=3/4: relative errors of E[L_c], of the worst diversity-histogram bin
/// and of E[L_d^u].
pub struct MdsrAgreement {
    pub lc: f64,
    pub histogram: f64,
    pub ldu: f64,
}

pub fn mdsr_agreement(trials: usize, seed: u64) -> MdsrAgreement {
    let (e, xi, rep) = (5, 2, 3);
    let params = SystemParams::reference(1500);
    let r = rates((3, 4), (1, 3));
    let n1 = r.distinct_rows(1500).unwrap() as usize;
    let rows = r.rows_per_node(1500, 5).unwrap() as usize;
    let design = SchemeDesign::MdsR { rates: r, wait_for: xi };
    let a = batch_assignment(1500, e, &r).unwrap();
    let d = delta(&params);
    let unit = params.comm_unit();

    let mut lc = 0.0;
    let mut ldu = 0.0;
    let mut hist = vec![0.0; e + 1];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let draw = draw_stragglers(params.beta, e, &mut rng);
        let o = run_computation(&a, &draw, &design, d).unwrap();
        lc += o.lc;
        ldu += unit * o.retained_diversities().iter().map(|&m| 1.0 / m as f64).sum::<f64>();
        for (m, c) in o.diversity_histogram(e).into_iter().enumerate() {
            hist[m] += c as f64;
        }
    }
    let n = trials as f64;
    let want_lc = params.beta * (harmonic(e) - harmonic(e - xi)) + rows as f64 * d;
    let want_ldu = unit * (1..=e).map(|m| mdsr_g(m, xi, e, rep, n1) / m as f64).sum::<f64>();
    let histogram = (0..=e)
        .map(|m| {
            let want = mdsr_g(m, xi, e, rep, n1) / n1 as f64;
            let got = hist[m] / (n * n1 as f64);
            match (want > 0.0, got == 0.0) {
                (true, _) => (got - want).abs() / want,
                (false, true) => 0.0,
                (false, false) => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    MdsrAgreement {
        lc: (lc / n - want_lc).abs() / want_lc,
        histogram,
        ldu: (ldu / n - want_ldu).abs() / want_ldu,
    }
}

/// Small designs of all three schemes on `SystemParams::reference(300)`.
pub fn small_designs() -> (SystemParams, Vec<SchemeDesign>) {
    let params = SystemParams::reference(300);
    let lt = LtParams { overhead: 60, gamma: 10, zeta: 0.1, target_failure: 1.0 };
    let designs = vec![
        SchemeDesign::RatelessIr { rates: rates((1, 2), (2, 3)), min_products: 400, lt },
        SchemeDesign::MdsIr { rates: rates((1, 1), (1, 3)), min_products: 300 },
        SchemeDesign::MdsIr { rates: rates((1, 2), (2, 3)), min_products: 500 },
        SchemeDesign::MdsR { rates: rates((3, 4), (1, 2)), wait_for: 3 },
    ];
    for d in &designs {
        d.validate(&params).unwrap();
    }
    (params, designs)
}

/// Trials in which a realized `L_c` undercuts `lc_lower` at the same draw
/// and product count.
pub fn lc_dominance_violations(trials: usize, seed: u64) -> usize {
    let (params, designs) = small_designs();
    let d = delta(&params);
    let mut bad = 0;
    for design in &designs {
        let a = match design {
            SchemeDesign::MdsR { rates, .. } => batch_assignment(params.k, params.e, rates),
            _ => cyclic_assignment(params.k, params.e, &design.rates()),
        }
        .unwrap();
        for t in 0..trials {
            let mut rng = trial_rng(seed, t as u64);
            let draw = draw_stragglers(params.beta, params.e, &mut rng);
            let o = run_computation(&a, &draw, design, d).unwrap();
            let lower = lc_lower(&draw.lambdas, o.total_products, d, params.storage_rows()).unwrap();
            if o.lc < lower {
                bad += 1;
            }
        }
    }
    bad
}

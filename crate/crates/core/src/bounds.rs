//! Scheme-independent lower bounds on computation, communication and total
//! latency.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{delta, LatencyBreakdown, SystemParams};
use crate::runtime::{completed, draw_stragglers};
use crate::stats::LatencyStats;

/// Slack for comparing integer product counts with the real cap `e mu k`.
const CAP_TOL: f64 = 1e-9;

/// `b^2/a` when `b` divides `a`, otherwise the value of the balanced
/// floor/ceil split of `a` units over `b` slots:
/// `(ceil(a/b) b - a)/floor(a/b) + (a - b floor(a/b))/ceil(a/b)`.
pub fn f_bound(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || a < b {
        return Err(Error::OutOfRange(format!("f({a}, {b}) needs a >= b > 0")));
    }
    let r = a / b;
    if r.fract() == 0.0 {
        return Ok(b * b / a);
    }
    let (fl, ce) = (r.floor(), r.ceil());
    Ok((ce * b - a) / fl + (a - b * fl) / ce)
}

/// `f(p, k)` evaluated in exact integer steps.
fn f_int(p: u64, k: u64) -> f64 {
    let (fl, rem) = (p / k, p % k);
    if rem == 0 {
        return (k * k) as f64 / p as f64;
    }
    let ce = fl + 1;
    (ce * k - p) as f64 / fl as f64 + rem as f64 / ce as f64
}

/// Products a node starting at `lambda` contributes by `t` under the real
/// per-node cap `cap`.
#[inline]
fn capped(lambda: f64, t: f64, delta: f64, cap: f64) -> f64 {
    (completed(lambda, t, delta, cap.ceil() as usize) as f64).min(cap)
}

fn capped_total(lambdas: &[f64], t: f64, delta: f64, cap: f64) -> f64 {
    lambdas.iter().map(|&l| capped(l, t, delta, cap)).sum()
}

/// Earliest instant at which the nodes, each storing at most `mu_k` rows
/// and starting at `lambdas`, can have finished `p` products in total.
pub fn lc_lower(lambdas: &[f64], p: usize, delta: f64, mu_k: f64) -> Result<f64> {
    if p == 0 {
        return Ok(0.0);
    }
    let need = p as f64;
    if need > lambdas.len() as f64 * mu_k + CAP_TOL {
        return Err(Error::OutOfRange(format!(
            "p = {p} exceeds the {} products the nodes can store",
            lambdas.len() as f64 * mu_k
        )));
    }
    let steps = mu_k.ceil() as usize;
    let mut lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = lambdas.iter().copied().fold(0.0, f64::max) + steps as f64 * delta;
    while hi - lo > delta / 4.0 {
        let mid = 0.5 * (lo + hi);
        if capped_total(lambdas, mid, delta, mu_k) + CAP_TOL >= need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut cands: Vec<f64> = lambdas
        .iter()
        .filter_map(|&l| {
            let i = completed(l, hi, delta, steps);
            let t = l + i as f64 * delta;
            (i > 0 && t > lo).then_some(t)
        })
        .collect();
    cands.sort_by(f64::total_cmp);
    Ok(cands
        .into_iter()
        .find(|&t| capped_total(lambdas, t, delta, mu_k) + CAP_TOL >= need)
        .unwrap_or(hi))
}

/// `u log2(q) / nu * f(p, k)`: the least downlink time for `p` products
/// carrying `k` distinct results.
pub fn ldu_lower(p: usize, k: usize, u: usize, q: u64, nu: f64) -> Result<f64> {
    if k == 0 || p < k {
        return Err(Error::OutOfRange(format!("p = {p} must be at least k = {k}")));
    }
    Ok(u as f64 * (q as f64).log2() / nu * f_int(p as u64, k as u64))
}

/// `u k log2(q) / (nu e)`: all `e` nodes send jointly.
pub fn lde_lower(k: usize, u: usize, q: u64, nu: f64, e: usize) -> f64 {
    u as f64 * k as f64 * (q as f64).log2() / (nu * e as f64)
}

/// `min over k <= p <= e mu k` of `lc_lower(p) + ldu_lower(p)` for one draw,
/// returned as its two terms at the minimizing `p`.
pub fn tau_u_lower_trial(params: &SystemParams, lambdas: &[f64]) -> (f64, f64) {
    let d = delta(params);
    let k = params.k;
    let cap = params.storage_rows();
    let p_max = (params.e as f64 * cap + CAP_TOL).floor() as usize;
    let unit = params.comm_unit();
    let g = |p: usize| unit * f_int(p as u64, k as u64);
    let start = lc_lower(lambdas, k, d, cap).expect("k products always fit");
    let mut best = start + g(k);
    let mut arg = (start, g(k));
    let floor_g = g(p_max);

    // Walk the remaining completion instants in time order. At instant t the
    // best admissible p is the largest one already reached.
    let steps = cap.ceil() as usize;
    let mut next: Vec<usize> = lambdas.iter().map(|&l| completed(l, start, d, steps) + 1).collect();
    let mut count = capped_total(lambdas, start, d, cap);
    loop {
        let mut j_min = usize::MAX;
        let mut t_min = f64::INFINITY;
        for (j, &l) in lambdas.iter().enumerate() {
            if next[j] <= steps {
                let t = l + next[j] as f64 * d;
                if t < t_min {
                    t_min = t;
                    j_min = j;
                }
            }
        }
        if j_min == usize::MAX || t_min + floor_g >= best {
            break;
        }
        let before = capped(lambdas[j_min], t_min - d / 2.0, d, cap);
        count += capped(lambdas[j_min], t_min, d, cap) - before;
        next[j_min] += 1;
        let p = ((count + CAP_TOL).floor() as usize).min(p_max);
        if p >= k && t_min + g(p) < best {
            best = t_min + g(p);
            arg = (t_min, g(p));
        }
    }
    arg
}

/// Draws for trial `t`: stream `t` of a ChaCha8 generator seeded with `seed`.
pub fn trial_lambdas(params: &SystemParams, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = crate::search::trial_rng(seed, trial);
    draw_stragglers(params.beta, params.e, &mut rng).lambdas
}

/// Per-trial `(computation, communication)` terms, accumulated in trial order.
fn monte_carlo(trials: usize, f: impl Fn(u64) -> (f64, f64) + Sync + Send) -> LatencyStats {
    let vals: Vec<(f64, f64)> = (0..trials as u64).into_par_iter().map(f).collect();
    let mut stats = LatencyStats::default();
    for (comp, comm) in vals {
        stats.push(&LatencyBreakdown { comp, dec: 0.0, comm, total: comp + comm, normalized: f64::NAN });
    }
    stats
}

/// Monte Carlo lower bound on the total latency when the users decode.
pub fn tau_u_lower(params: &SystemParams, trials: usize, seed: u64) -> LatencyStats {
    monte_carlo(trials, |t| tau_u_lower_trial(params, &trial_lambdas(params, seed, t)))
}

/// Monte Carlo lower bound on the total latency when the nodes decode.
pub fn tau_e_lower(params: &SystemParams, trials: usize, seed: u64) -> LatencyStats {
    let d = delta(params);
    let tail = lde_lower(params.k, params.u, params.q, params.nu, params.e);
    monte_carlo(trials, |t| {
        let lc = lc_lower(&trial_lambdas(params, seed, t), params.k, d, params.storage_rows());
        (lc.expect("k products always fit"), tail)
    })
}

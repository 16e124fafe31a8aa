//! Grid-search optimizers over scheme designs and robust-Soliton parameters.
//!
//! Every candidate is evaluated on the same straggler draws: trial `t` always
//! uses stream `t` of a ChaCha8 generator seeded with the master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::trial_lambdas;
use crate::error::{Error, Result};
use crate::fountain::{estimate_decode_cost, DegreeDistribution, FailureBound, MeanDecodeCost};
use crate::latency::{mdsr_decodable, mdsr_totals, trial_latency};
use crate::model::{delta, psi, Decoder, LatencyBreakdown, LtParams, Scheme, SchemeDesign, SystemParams};
use crate::placement::{feasible_designs, feasible_designs_on_grid};
use crate::runtime::{Evaluator, TrialSummary};
use crate::stats::LatencyStats;

/// Generator for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte Carlo budget of the design search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Trials for the final estimate of each shortlisted candidate.
    pub trials: usize,
    /// Trials for the first pass over the whole grid.
    pub coarse_trials: usize,
    /// Candidates carried from the first pass to the second.
    pub shortlist: usize,
    /// Grid spacing of `k/Ro`, `k/(Ro Ri)` and `p`, as a fraction of `k`.
    pub grid_step: f64,
    /// Decodes used to estimate the mean LT decoding cost.
    pub decode_samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { seed: 0, trials: 50_000, coarse_trials: 2_000, shortlist: 10, grid_step: 0.1, decode_samples: 200 }
    }
}

impl SearchConfig {
    fn step(&self, k: usize) -> usize {
        ((self.grid_step * k as f64).round() as usize).max(1)
    }
}

/// Estimated latency of one design.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub design: SchemeDesign,
    pub latency: LatencyBreakdown,
    /// 95% half-width of the normalized total.
    pub ci95_normalized: f64,
}

impl Estimate {
    fn from_stats(design: SchemeDesign, stats: &LatencyStats, psi: f64) -> Self {
        Self { design, latency: stats.mean(psi), ci95_normalized: stats.ci95_normalized(psi) }
    }
}

/// Default robust-Soliton parameters for each decoding placement.
pub fn default_lt(params: &SystemParams, decoder: Decoder) -> LtParams {
    let (gamma, zeta) = match decoder {
        Decoder::User => (210, 1e-4),
        Decoder::Edge => (220, 1e-2),
    };
    LtParams {
        overhead: LtParams::default_overhead(params),
        gamma: gamma.min(params.k),
        zeta,
        target_failure: 1e-5,
    }
}

/// Mean inactivation-decoding cost of `k + overhead` received LT rows.
pub fn lt_decode_cost(params: &SystemParams, lt: &LtParams, samples: usize, seed: u64) -> Result<MeanDecodeCost> {
    let dist = DegreeDistribution::robust_soliton(params.k, lt.gamma, lt.zeta)?;
    Ok(estimate_decode_cost(&dist, params.k, params.k + lt.overhead, samples, seed))
}

/// Straggling times of trials `0..n`, drawn once and shared by every
/// candidate.
pub fn trial_bank(params: &SystemParams, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..trials as u64).into_par_iter().map(|t| trial_lambdas(params, seed, t)).collect()
}

type Costs<'a> = [(Decoder, Option<&'a MeanDecodeCost>)];

fn accumulate(
    params: &SystemParams,
    design: &SchemeDesign,
    runs: impl Iterator<Item = TrialSummary> + Clone,
    decoders: &Costs,
) -> Result<Vec<LatencyStats>> {
    let p = psi(params);
    decoders
        .iter()
        .map(|&(decoder, cost)| {
            let mut stats = LatencyStats::default();
            for s in runs.clone() {
                let mut l = trial_latency(params, design, decoder, &s, cost)?;
                l.normalized = l.total / p;
                stats.push(&l);
            }
            Ok(stats)
        })
        .collect()
}

/// Latency statistics of designs that differ only in `p`, indexed
/// `[design][decoder]`.
fn simulate_thresholds(
    params: &SystemParams,
    designs: &[SchemeDesign],
    decoders: &Costs,
    bank: &[Vec<f64>],
) -> Result<Vec<Vec<LatencyStats>>> {
    let ps: Vec<usize> = designs.iter().map(SchemeDesign::threshold).collect();
    let first = designs.iter().min_by_key(|d| d.threshold()).expect("nonempty group");
    let eval = Evaluator::new(params.k, params.e, first, delta(params))?;
    let runs: Vec<Vec<TrialSummary>> = bank.par_iter().map(|l| eval.evaluate_thresholds(l, &ps)).collect();
    designs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.validate(params)?;
            accumulate(params, d, runs.iter().map(|r| r[i]), decoders)
        })
        .collect()
}

/// Monte Carlo latency of `design` for each decoder in `decoders`, sharing
/// the computation phase.
pub fn simulate(
    params: &SystemParams,
    design: &SchemeDesign,
    decoders: &Costs,
    trials: usize,
    seed: u64,
) -> Result<Vec<LatencyStats>> {
    design.validate(params)?;
    let bank = trial_bank(params, trials, seed);
    let eval = Evaluator::new(params.k, params.e, design, delta(params))?;
    let runs: Vec<TrialSummary> = bank.par_iter().map(|l| eval.evaluate(l)).collect();
    accumulate(params, design, runs.into_iter(), decoders)
}

/// Runs of consecutive designs sharing the same rates.
fn rate_groups(designs: &[SchemeDesign]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=designs.len() {
        if i == designs.len() || designs[i].rates() != designs[start].rates() {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Every design of an irregular-repetition scheme on the search grid.
pub fn grid_designs(params: &SystemParams, scheme: Scheme, lt: &LtParams, step: usize) -> Vec<SchemeDesign> {
    let k = params.k as u64;
    let mut out = Vec::new();
    for rates in feasible_designs_on_grid(params, scheme, lt.overhead, step) {
        let n = rates.total_rows(k).expect("grid rates are integral") as usize;
        let make = |p: usize| match scheme {
            Scheme::RatelessIr => SchemeDesign::RatelessIr { rates, min_products: p, lt: *lt },
            _ => SchemeDesign::MdsIr { rates, min_products: p },
        };
        let target = make(0).distinct_target(params.k).expect("irregular scheme");
        if target > rates.distinct_rows(k).unwrap_or(0) as usize {
            continue;
        }
        out.push(make(target));
        out.extend((target.div_ceil(step).max(1) * step..=n).step_by(step).filter(|&p| p > target).map(make));
    }
    out
}

/// All decodable regular-repetition designs with their closed-form latency,
/// in enumeration order.
pub fn mdsr_candidates(params: &SystemParams, decoder: Decoder) -> Vec<(SchemeDesign, LatencyBreakdown)> {
    let d = delta(params);
    let k = params.k as u64;
    feasible_designs(params, Scheme::MdsR, 0)
        .flat_map(|rates| (1..=params.e).map(move |xi| SchemeDesign::MdsR { rates, wait_for: xi }))
        .filter(|design| {
            let rates = design.rates();
            let rep = rates.replication_factor().expect("integral replication") as usize;
            rates.rows_per_node(k, params.e as u64).is_some()
                && mdsr_decodable(design.threshold(), params.e, rep, rates.outer)
        })
        .filter_map(|design| Some((design, mdsr_totals(params, &design, decoder, d).ok()?)))
        .collect()
}

fn argmin<T>(items: impl IntoIterator<Item = (T, f64)>) -> Option<T> {
    let mut best: Option<(T, f64)> = None;
    for (x, v) in items {
        if best.as_ref().map_or(true, |(_, b)| v < *b) {
            best = Some((x, v));
        }
    }
    best.map(|(x, _)| x)
}

/// Best design of `scheme` for each decoder in `decoders`.
///
/// MDS-R designs are ranked by their exact closed forms over the full rate
/// set; the winner is then re-estimated by simulation. The irregular schemes
/// are searched in two passes: every grid point with `coarse_trials`, then the
/// best `shortlist` per decoder with `trials`.
pub fn optimize_design(
    params: &SystemParams,
    scheme: Scheme,
    decoders: &[(Decoder, Option<LtParams>)],
    cfg: &SearchConfig,
) -> Result<Vec<Estimate>> {
    params.validate()?;
    let p = psi(params);
    let none = || Error::NoFeasibleDesign(format!("{scheme} at k = {}", params.k));
    if scheme == Scheme::MdsR {
        return decoders
            .iter()
            .map(|&(decoder, _)| {
                let design = argmin(mdsr_candidates(params, decoder).into_iter().map(|(d, l)| (d, l.total)))
                    .ok_or_else(none)?;
                let stats = simulate(params, &design, &[(decoder, None)], cfg.trials, cfg.seed)?;
                Ok(Estimate::from_stats(design, &stats[0], p))
            })
            .collect();
    }

    let step = cfg.step(params.k);
    let lts: Vec<LtParams> = decoders.iter().map(|&(d, lt)| lt.unwrap_or_else(|| default_lt(params, d))).collect();
    let costs: Vec<Option<MeanDecodeCost>> = lts
        .iter()
        .map(|lt| match scheme {
            Scheme::RatelessIr => lt_decode_cost(params, lt, cfg.decode_samples, cfg.seed).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let cd: Vec<(Decoder, Option<&MeanDecodeCost>)> =
        decoders.iter().zip(&costs).map(|(&(d, _), c)| (d, c.as_ref())).collect();
    let bank = trial_bank(params, cfg.trials.max(cfg.coarse_trials), cfg.seed);

    // The grid depends on the decoder only through the overhead.
    let mut out: Vec<Option<Estimate>> = vec![None; decoders.len()];
    for (j, lt) in lts.iter().enumerate() {
        if out[j].is_some() {
            continue;
        }
        let members: Vec<usize> = (j..lts.len()).filter(|&i| lts[i].overhead == lt.overhead).collect();
        let sub: Vec<_> = members.iter().map(|&i| cd[i]).collect();
        let cands = grid_designs(params, scheme, lt, step);
        if cands.is_empty() {
            return Err(none());
        }
        let groups = rate_groups(&cands);
        let mut coarse = vec![Vec::new(); cands.len()];
        for g in &groups {
            let stats = simulate_thresholds(params, &cands[g.clone()], &sub, &bank[..cfg.coarse_trials])?;
            for (i, s) in g.clone().zip(stats) {
                coarse[i] = s;
            }
        }
        let shortlists: Vec<Vec<usize>> = (0..members.len())
            .map(|m| {
                let mut ranked: Vec<usize> = (0..cands.len()).collect();
                ranked.sort_by(|&a, &b| coarse[a][m].total.mean().total_cmp(&coarse[b][m].total.mean()).then(a.cmp(&b)));
                ranked.truncate(cfg.shortlist.max(1));
                ranked.sort_unstable();
                ranked
            })
            .collect();
        let mut union: Vec<usize> = shortlists.concat();
        union.sort_unstable();
        union.dedup();
        let finalists: Vec<SchemeDesign> = union.iter().map(|&i| cands[i]).collect();
        let mut full = vec![Vec::new(); cands.len()];
        for g in rate_groups(&finalists) {
            let stats = simulate_thresholds(params, &finalists[g.clone()], &sub, &bank[..cfg.trials])?;
            for (i, s) in g.map(|g| union[g]).zip(stats) {
                full[i] = s;
            }
        }
        for (m, &slot) in members.iter().enumerate() {
            let best = argmin(shortlists[m].iter().map(|&i| (i, full[i][m].total.mean()))).ok_or_else(none)?;
            let design = match cands[best] {
                SchemeDesign::RatelessIr { rates, min_products, .. } => {
                    SchemeDesign::RatelessIr { rates, min_products, lt: lts[slot] }
                }
                d => d,
            };
            out[slot] = Some(Estimate::from_stats(design, &full[best][m], p));
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every decoder searched")).collect())
}

/// Robust-Soliton parameters on `gammas x zetas` whose failure bound at
/// `phi_prime` is at most `target_failure`, minimizing the mean number of
/// operations to decode `vectors` right-hand sides from `k + phi_prime` rows.
#[allow(clippy::too_many_arguments)]
pub fn optimize_soliton(
    k: usize,
    phi_prime: usize,
    q: u64,
    target_failure: f64,
    gammas: &[usize],
    zetas: &[f64],
    vectors: usize,
    samples: usize,
    seed: u64,
) -> Result<(usize, f64)> {
    if !(target_failure > 0.0 && target_failure <= 1.0) {
        return Err(Error::OutOfRange(format!("target failure {target_failure} outside (0, 1]")));
    }
    let mut scored = Vec::new();
    for &gamma in gammas {
        for &zeta in zetas {
            let dist = DegreeDistribution::robust_soliton(k, gamma, zeta)?;
            if target_failure < 1.0 && FailureBound::new(k, q, &dist)?.at(phi_prime) > target_failure {
                continue;
            }
            let cost = estimate_decode_cost(&dist, k, k + phi_prime, samples, seed);
            scored.push(((gamma, zeta), cost.total_ops(vectors)));
        }
    }
    argmin(scored).ok_or(Error::ConstraintInfeasible { target: target_failure })
}

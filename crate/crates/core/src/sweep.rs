//! Parameter sweeps: for each value of the swept variable, the optimized
//! latency of every scheme, the converse bound and the local baseline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{tau_e_lower, tau_u_lower};
use crate::error::{Error, Result};
use crate::fountain::{DegreeDistribution, FailureBound};
use crate::mds::binary_mds_exists;
use crate::model::{format_rate, psi, Decoder, LatencyBreakdown, LtParams, Scheme, SchemeDesign, SystemParams};
use crate::search::{default_lt, optimize_design, SearchConfig};

/// The swept system constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    /// Rows of `W` (with `r = k`).
    K,
    /// Mean straggling time, in seconds.
    Beta,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::K => "k",
            SweepVar::Beta => "beta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "k" => Some(SweepVar::K),
            "beta" => Some(SweepVar::Beta),
            _ => None,
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &SystemParams, value: f64) -> Result<SystemParams> {
        match self {
            SweepVar::K => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidParams(format!("k = {value} is not a positive integer")));
                }
                Ok(base.with_k(value as usize))
            }
            SweepVar::Beta => Ok(SystemParams { beta: value, ..base.clone() }),
        }
    }

    /// The reference grid: `k = 5000, 6000, ..., 15000`, or `beta = 10, 20,
    /// ..., 80` ms.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVar::K => (5..=15).map(|i| i as f64 * 1000.0).collect(),
            SweepVar::Beta => (1..=8).map(|i| i as f64 * 0.01).collect(),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a sweep row describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Scheme(Scheme),
    LowerBound,
    /// The user computing `W x` alone.
    Local,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::Scheme(s) => s.name(),
            RowKind::LowerBound => "lower-bound",
            RowKind::Local => "local",
        }
    }
}

/// One output line of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub var: SweepVar,
    pub value: f64,
    pub kind: RowKind,
    pub decoder: Decoder,
    pub latency: LatencyBreakdown,
    /// The optimized design, for scheme rows.
    pub design: Option<SchemeDesign>,
    pub ci95_normalized: f64,
    /// The design assumes a binary MDS code that does not exist.
    pub warn_binary_mds: bool,
}

impl SweepRow {
    /// `(p or xi, Ro, Ri)` as printed in reports; empty for non-scheme rows.
    pub fn design_fields(&self) -> [String; 3] {
        match self.design {
            Some(d) => {
                let r = d.rates();
                [d.threshold().to_string(), format_rate(r.outer), format_rate(r.replication)]
            }
            None => Default::default(),
        }
    }
}

/// User overrides of the robust-Soliton parameters; unset fields take the
/// per-decoder defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtChoice {
    pub gamma: Option<usize>,
    pub zeta: Option<f64>,
    pub overhead: Option<usize>,
    pub target_failure: Option<f64>,
}

impl LtChoice {
    pub fn resolve(&self, params: &SystemParams, decoder: Decoder) -> LtParams {
        let d = default_lt(params, decoder);
        LtParams {
            overhead: self.overhead.unwrap_or(d.overhead),
            gamma: self.gamma.unwrap_or(d.gamma),
            zeta: self.zeta.unwrap_or(d.zeta),
            target_failure: self.target_failure.unwrap_or(d.target_failure),
        }
    }
}

/// Checks the failure-probability constraint at the provisioned overhead.
pub fn check_lt(params: &SystemParams, lt: &LtParams) -> Result<()> {
    let dist = DegreeDistribution::robust_soliton(params.k, lt.gamma, lt.zeta)?;
    let pf = FailureBound::new(params.k, params.q, &dist)?.at(lt.overhead);
    if pf > lt.target_failure {
        return Err(Error::ConstraintInfeasible { target: lt.target_failure });
    }
    Ok(())
}

/// Everything a sweep needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub base: SystemParams,
    pub var: SweepVar,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub decoders: Vec<Decoder>,
    pub lt_user: LtChoice,
    pub lt_edge: LtChoice,
    pub search: SearchConfig,
    pub bounds: bool,
    pub local: bool,
}

impl SweepPlan {
    /// The reference setup for `var` with all schemes and both decoders.
    pub fn reference(var: SweepVar) -> Self {
        Self {
            base: SystemParams::reference(10_000),
            var,
            values: var.default_values(),
            schemes: Scheme::ALL.to_vec(),
            decoders: Decoder::BOTH.to_vec(),
            lt_user: LtChoice::default(),
            lt_edge: LtChoice::default(),
            search: SearchConfig::default(),
            bounds: true,
            local: true,
        }
    }

    fn lt(&self, params: &SystemParams, decoder: Decoder) -> LtParams {
        match decoder {
            Decoder::User => self.lt_user.resolve(params, decoder),
            Decoder::Edge => self.lt_edge.resolve(params, decoder),
        }
    }
}

/// Rows for one value of the swept variable, ordered by decoder, then scheme,
/// then bound, then baseline.
pub fn run_point(plan: &SweepPlan, value: f64) -> Result<Vec<SweepRow>> {
    let params = plan.var.apply(&plan.base, value)?;
    params.validate()?;
    let norm = psi(&params);
    let row = |kind, decoder, latency, design, ci| SweepRow {
        var: plan.var,
        value,
        kind,
        decoder,
        latency,
        design,
        ci95_normalized: ci,
        warn_binary_mds: false,
    };

    let mut per_decoder: Vec<Vec<SweepRow>> = vec![Vec::new(); plan.decoders.len()];
    for &scheme in &plan.schemes {
        let choices: Vec<(Decoder, Option<LtParams>)> =
            plan.decoders.iter().map(|&d| (d, Some(plan.lt(&params, d)))).collect();
        if scheme == Scheme::RatelessIr {
            for (_, lt) in &choices {
                check_lt(&params, lt.as_ref().expect("resolved above"))?;
            }
        }
        let found = optimize_design(&params, scheme, &choices, &plan.search)?;
        for (slot, est) in found.into_iter().enumerate() {
            let mut r = row(RowKind::Scheme(scheme), plan.decoders[slot], est.latency, Some(est.design), est.ci95_normalized);
            let n1 = est.design.rates().distinct_rows(params.k as u64).unwrap_or(0);
            r.warn_binary_mds = scheme != Scheme::RatelessIr && !binary_mds_exists(params.k as u64, n1);
            per_decoder[slot].push(r);
        }
    }
    for (slot, &decoder) in plan.decoders.iter().enumerate() {
        if plan.bounds {
            let stats = match decoder {
                Decoder::User => tau_u_lower(&params, plan.search.trials, plan.search.seed),
                Decoder::Edge => tau_e_lower(&params, plan.search.trials, plan.search.seed),
            };
            per_decoder[slot].push(row(RowKind::LowerBound, decoder, stats.mean(norm), None, stats.ci95_normalized(norm)));
        }
        if plan.local {
            per_decoder[slot].push(row(RowKind::Local, decoder, LatencyBreakdown::new(norm, 0.0, 0.0, norm), None, 0.0));
        }
    }
    Ok(per_decoder.concat())
}

/// Runs every point of the plan in order.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &v in &plan.values {
        rows.extend(run_point(plan, v)?);
    }
    Ok(rows)
}

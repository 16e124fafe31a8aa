//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "e": 5, "u": 10, "mu": 0.6, "beta": 0.03, "nu": 1e8,
//!               "f_cpu": 2.7e9, "n_e": 50, "n_u": 2, "q": 2, "k": 10000 },
//!   "schemes": { "enabled": ["rateless-ir", "mds-ir", "mds-r"],
//!                "rateless_ir": { "user": { "gamma": 210, "zeta": 1e-4 },
//!                                 "edge": { "gamma": 220, "zeta": 1e-2 } } },
//!   "sweep": { "var": "k", "values": [5000, 6000], "decoder": "both",
//!              "bounds": true, "local": true },
//!   "mc": { "trials": 50000, "coarse_trials": 2000, "shortlist": 10,
//!           "grid_step": 0.1, "decode_samples": 200, "seed": 0 }
//! }
//! ```
//!
//! Every key is optional. `system.r` defaults to `k`, and the swept variable
//! overrides its `system` entry.

use std::path::Path;

use anyhow::Context;
use edgeinfer_core::search::SearchConfig;
use edgeinfer_core::sweep::{LtChoice, SweepPlan, SweepVar};
use edgeinfer_core::{Decoder, Scheme, SystemParams};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub system: RawSystem,
    #[serde(default)]
    pub schemes: RawSchemes,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub mc: RawMc,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub e: Option<usize>,
    pub u: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub nu: Option<f64>,
    pub f_cpu: Option<f64>,
    pub n_e: Option<usize>,
    pub n_u: Option<usize>,
    pub q: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchemes {
    pub enabled: Option<Vec<String>>,
    #[serde(default)]
    pub rateless_ir: RawLt,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLt {
    #[serde(default)]
    pub user: LtChoice,
    #[serde(default)]
    pub edge: LtChoice,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub var: Option<String>,
    pub values: Option<Vec<f64>>,
    pub decoder: Option<String>,
    pub bounds: Option<bool>,
    pub local: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMc {
    pub trials: Option<usize>,
    pub coarse_trials: Option<usize>,
    pub shortlist: Option<usize>,
    pub grid_step: Option<f64>,
    pub decode_samples: Option<usize>,
    pub seed: Option<u64>,
}

pub fn load(path: &Path) -> anyhow::Result<RawConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_decoders(s: &str) -> Option<Vec<Decoder>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "user" => Some(vec![Decoder::User]),
        "edge" => Some(vec![Decoder::Edge]),
        "both" => Some(Decoder::BOTH.to_vec()),
        _ => None,
    }
}

fn check_lt(who: &str, lt: &LtChoice, errs: &mut Vec<String>) {
    if lt.gamma == Some(0) {
        errs.push(format!("schemes.rateless_ir.{who}.gamma must be at least 1"));
    }
    if let Some(z) = lt.zeta {
        if !(z > 0.0 && z < 1.0) {
            errs.push(format!("schemes.rateless_ir.{who}.zeta must lie in (0, 1)"));
        }
    }
    if let Some(p) = lt.target_failure {
        if !(p > 0.0 && p <= 1.0) {
            errs.push(format!("schemes.rateless_ir.{who}.target_failure must lie in (0, 1]"));
        }
    }
}

/// Applies defaults and checks everything, reporting every violation.
pub fn validate(raw: &RawConfig) -> Result<SweepPlan, Vec<String>> {
    let mut errs = Vec::new();
    let s = &raw.system;
    let reference = SystemParams::reference(s.k.unwrap_or(10_000));
    let base = SystemParams {
        e: s.e.unwrap_or(reference.e),
        u: s.u.unwrap_or(reference.u),
        k: reference.k,
        r: s.r.unwrap_or(reference.k),
        mu: s.mu.unwrap_or(reference.mu),
        beta: s.beta.unwrap_or(reference.beta),
        nu: s.nu.unwrap_or(reference.nu),
        f_cpu: s.f_cpu.unwrap_or(reference.f_cpu),
        n_e: s.n_e.unwrap_or(reference.n_e),
        n_u: s.n_u.unwrap_or(reference.n_u),
        q: s.q.unwrap_or(reference.q),
    };
    errs.extend(base.problems());

    let schemes = match &raw.schemes.enabled {
        None => Scheme::ALL.to_vec(),
        Some(names) => {
            let mut out = Vec::new();
            for n in names {
                match Scheme::parse(n) {
                    Some(x) if !out.contains(&x) => out.push(x),
                    Some(_) => {}
                    None => errs.push(format!("unknown scheme {n:?}")),
                }
            }
            out.sort();
            out
        }
    };
    check_lt("user", &raw.schemes.rateless_ir.user, &mut errs);
    check_lt("edge", &raw.schemes.rateless_ir.edge, &mut errs);

    let var = match raw.sweep.var.as_deref() {
        None => Some(SweepVar::K),
        Some(v) => SweepVar::parse(v).or_else(|| {
            errs.push(format!("sweep.var must be \"k\" or \"beta\", got {v:?}"));
            None
        }),
    };
    let decoders = match raw.sweep.decoder.as_deref() {
        None => Decoder::BOTH.to_vec(),
        Some(d) => parse_decoders(d).unwrap_or_else(|| {
            errs.push(format!("sweep.decoder must be user, edge or both, got {d:?}"));
            Vec::new()
        }),
    };
    let values = match (&raw.sweep.values, var) {
        (Some(v), _) => v.clone(),
        (None, Some(var)) => var.default_values(),
        (None, None) => Vec::new(),
    };
    if raw.sweep.values.as_ref().is_some_and(Vec::is_empty) {
        errs.push("sweep.values must not be empty".into());
    }
    for &v in &values {
        match var {
            Some(SweepVar::K) if !(v >= 1.0 && v.fract() == 0.0) => {
                errs.push(format!("sweep value k = {v} is not a positive integer"))
            }
            Some(SweepVar::Beta) if !(v > 0.0 && v.is_finite()) => {
                errs.push(format!("sweep value beta = {v} must be positive"))
            }
            _ => {}
        }
    }

    let d = SearchConfig::default();
    let m = &raw.mc;
    let search = SearchConfig {
        seed: m.seed.unwrap_or(d.seed),
        trials: m.trials.unwrap_or(d.trials),
        coarse_trials: m.coarse_trials.unwrap_or(d.coarse_trials),
        shortlist: m.shortlist.unwrap_or(d.shortlist),
        grid_step: m.grid_step.unwrap_or(d.grid_step),
        decode_samples: m.decode_samples.unwrap_or(d.decode_samples),
    };
    for (name, v) in [
        ("mc.trials", search.trials),
        ("mc.coarse_trials", search.coarse_trials),
        ("mc.shortlist", search.shortlist),
        ("mc.decode_samples", search.decode_samples),
    ] {
        if v == 0 {
            errs.push(format!("{name} must be at least 1"));
        }
    }
    if search.coarse_trials > search.trials {
        errs.push("mc.coarse_trials must not exceed mc.trials".into());
    }
    if !(search.grid_step > 0.0 && search.grid_step <= 1.0) {
        errs.push("mc.grid_step must lie in (0, 1]".into());
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(SweepPlan {
        base,
        var: var.expect("checked"),
        values,
        schemes,
        decoders,
        lt_user: raw.schemes.rateless_ir.user,
        lt_edge: raw.schemes.rateless_ir.edge,
        search,
        bounds: raw.sweep.bounds.unwrap_or(true),
        local: raw.sweep.local.unwrap_or(true),
    })
}

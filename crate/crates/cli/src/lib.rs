//! Sweep driver behind the `edgeinfer` binary.

pub mod config;
pub mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use edgeinfer_core::placement::{batch_assignment, cyclic_assignment};
use edgeinfer_core::sweep::{run_sweep, RowKind, SweepPlan};
use edgeinfer_core::{Decoder, SchemeDesign};

/// Files written by [`execute`].
#[derive(Debug, Default)]
pub struct Written {
    pub sweeps: Vec<PathBuf>,
    pub assignments: Vec<PathBuf>,
}

/// Runs the sweep and writes `sweep_<var>_<decoder>.csv` for each decoder
/// into `out`. With `dump` set, also writes the assignment matrix of each
/// scheme's optimum at the first sweep value as `assignment_<scheme>.csv`.
pub fn execute(plan: &SweepPlan, out: &Path, warn: bool, dump: bool) -> anyhow::Result<Written> {
    if plan.values.is_empty() {
        bail!("nothing to sweep");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let rows = run_sweep(plan)?;
    let mut written = Written::default();
    for &decoder in &plan.decoders {
        let path = out.join(format!("sweep_{}_{}.csv", plan.var.name(), decoder.name()));
        let mine: Vec<_> = rows.iter().filter(|r| r.decoder == decoder).cloned().collect();
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        output::write_rows(BufWriter::new(file), &mine, warn)?;
        written.sweeps.push(path);
    }
    if dump {
        let first = plan.values[0];
        let decoder = plan.decoders.first().copied().unwrap_or(Decoder::User);
        let k = plan.var.apply(&plan.base, first)?.k;
        for r in rows.iter().filter(|r| r.value == first && r.decoder == decoder) {
            let (RowKind::Scheme(scheme), Some(design)) = (r.kind, r.design) else { continue };
            let rates = design.rates();
            let a = match design {
                SchemeDesign::MdsR { .. } => batch_assignment(k, plan.base.e, &rates)?,
                _ => cyclic_assignment(k, plan.base.e, &rates)?,
            };
            let path = out.join(format!("assignment_{}.csv", scheme.name()));
            std::fs::write(&path, a.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            written.assignments.push(path);
        }
    }
    Ok(written)
}

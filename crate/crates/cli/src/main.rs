use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use edgeinfer_cli::config::{self, RawConfig};
use edgeinfer_cli::execute;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepArg {
    K,
    Beta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecoderArg {
    User,
    Edge,
    Both,
}

/// Latency sweeps of coded distributed inference at the network edge.
#[derive(Debug, Parser)]
#[command(name = "edgeinfer", version)]
struct Args {
    /// JSON run configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed of the Monte Carlo trials.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per final estimate.
    #[arg(long)]
    trials: Option<usize>,
    /// Variable to sweep.
    #[arg(long, value_enum)]
    sweep: Option<SweepArg>,
    /// Shorthand for `--sweep beta`.
    #[arg(long, conflicts_with = "sweep")]
    beta_sweep: bool,
    /// Sweep values, comma separated (beta in seconds).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Schemes to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Who decodes.
    #[arg(long, value_enum)]
    decoder: Option<DecoderArg>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Append a column flagging MDS designs whose binary MDS code cannot exist.
    #[arg(long)]
    warn_binary_mds: bool,
    /// Also write the optimal assignment matrices at the first sweep value.
    #[arg(long)]
    dump_assignments: bool,
}

fn merged(args: &Args) -> anyhow::Result<RawConfig> {
    let mut raw = match &args.config {
        Some(p) => config::load(p)?,
        None => RawConfig::default(),
    };
    if let Some(s) = args.seed {
        raw.mc.seed = Some(s);
    }
    if let Some(t) = args.trials {
        raw.mc.trials = Some(t);
        if raw.mc.coarse_trials.is_some_and(|c| c > t) || t < 2_000 {
            raw.mc.coarse_trials = Some(raw.mc.coarse_trials.unwrap_or(2_000).min(t));
        }
    }
    let sweep = if args.beta_sweep { Some(SweepArg::Beta) } else { args.sweep };
    if let Some(s) = sweep {
        let var = match s {
            SweepArg::K => "k",
            SweepArg::Beta => "beta",
        };
        if raw.sweep.var.as_deref() != Some(var) && args.values.is_none() {
            raw.sweep.values = None;
        }
        raw.sweep.var = Some(var.into());
    }
    if let Some(v) = &args.values {
        raw.sweep.values = Some(v.clone());
    }
    if let Some(s) = &args.schemes {
        raw.schemes.enabled = Some(s.clone());
    }
    if let Some(d) = args.decoder {
        raw.sweep.decoder = Some(format!("{d:?}").to_ascii_lowercase());
    }
    Ok(raw)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let raw = match merged(&args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let plan = match config::validate(&raw) {
        Ok(p) => p,
        Err(errs) => {
            for e in errs {
                eprintln!("config error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    match execute(&plan, &args.out, args.warn_binary_mds, args.dump_assignments) {
        Ok(w) => {
            for p in w.sweeps.iter().chain(&w.assignments) {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

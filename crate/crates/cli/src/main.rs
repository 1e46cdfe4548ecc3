//! `doco` — run, evaluate, sweep, and check distributed online
//! constrained-optimization simulations.
//!
//! Exit codes: 0 success, 2 config error, 3 invariant violation,
//! 4 solver non-convergence, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use doco_core::algorithm::Mode;
use doco_core::config::{load_config, RunConfig};
use doco_core::orchestrate::{
    check, evaluate_dir, run_pipeline, sweep, classify, ExitClass, SweepOptions,
};
use doco_core::Error;

#[derive(Parser)]
#[command(name = "doco", version, about = "Distributed online constrained optimization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (falls back to config `out_dir`, then $DOCO_OUT_DIR,
    /// then ./doco-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on the first invariant violation (default).
    #[arg(long, conflicts_with = "audit")]
    strict: bool,
    /// Record invariant violations and keep running.
    #[arg(long)]
    audit: bool,
    /// Worker-count hint for per-node updates and comparator solves.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inclusive horizon exponent range, e.g. `9..13` for T = 512..8192.
    #[arg(long, default_value = "9..13")]
    horizons: String,
    /// Odd number of seeds for per-horizon medians (1 = single seed).
    #[arg(long, default_value_t = 1)]
    median_seeds: usize,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the engine and emit trace.csv, metrics.csv, summary.json.
    Run(RunArgs),
    /// Recompute metrics.csv from a stored trace directory.
    Evaluate {
        /// Directory containing trace.csv and summary.json.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Horizon sweep: metrics.csv, slopes.csv, bounds.csv per horizon.
    Sweep(SweepArgs),
    /// Run sampled property suites against a configuration.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn out_dir_for(cli_out: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    cli_out
        .or_else(|| config.out_dir.clone())
        .or_else(|| std::env::var_os("DOCO_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("doco-out"))
}

fn apply_overrides(
    config: &mut RunConfig,
    strict: bool,
    audit: bool,
    threads: Option<usize>,
    seed: Option<u64>,
) {
    if strict {
        config.mode = Mode::Strict;
    }
    if audit {
        config.mode = Mode::Audit;
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    if let Some(s) = seed {
        config.seed = s;
        config.problem.seed = Some(s);
    }
}

fn exit_code(err: &Error) -> u8 {
    match classify(err) {
        ExitClass::Success => 0,
        ExitClass::ConfigError => 2,
        ExitClass::InvariantViolation => 3,
        ExitClass::SolverFailure => 4,
        ExitClass::Other => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let mut config = load_config(&args.config)?;
            apply_overrides(&mut config, args.strict, args.audit, args.threads, args.seed);
            let out = out_dir_for(args.out, &config);
            let output = run_pipeline(&config, &out)?;
            if let Some(row) = output.rows.last() {
                println!(
                    "T={} regret={:.6} fit={:.6} fit_sq={:.6} C_T*={:.6}",
                    row.horizon, row.regret, row.fit, row.fit_sq, row.c_t_star
                );
            }
            println!(
                "dual bound ratio {:.3e}, consensus margin {:.3e}, violations {}",
                output.dual_bound_max_ratio, output.consensus_min_margin, output.violations
            );
            println!("artifacts written to {}", output.out_dir.display());
            Ok(())
        }
        Command::Evaluate { trace, threads } => {
            let report = evaluate_dir(&trace, threads.unwrap_or(1))?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Sweep(args) => {
            let mut config = load_config(&args.config)?;
            apply_overrides(&mut config, false, false, args.threads, args.seed);
            let out = out_dir_for(args.out, &config);
            let (lo, hi) = parse_horizons(&args.horizons)?;
            let opts = SweepOptions {
                exp_lo: lo,
                exp_hi: hi,
                median_seeds: args.median_seeds,
            };
            let output = sweep(&config, &out, &opts)?;
            for (name, fit) in &output.slopes {
                println!(
                    "slope[{name}] = {:.4} ({} points{})",
                    fit.slope,
                    fit.used,
                    if fit.warnings.is_empty() {
                        String::new()
                    } else {
                        format!(", {} excluded", fit.warnings.len())
                    }
                );
            }
            println!("artifacts written to {}", out.display());
            Ok(())
        }
        Command::Check { config } => {
            let config = load_config(&config)?;
            let report = check(&config)?;
            for line in &report.lines {
                println!(
                    "check {:<36} {} ({})",
                    line.name,
                    if line.passed { "pass" } else { "FAIL" },
                    line.detail
                );
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Invariant {
                    name: "property_checks",
                    t: 0,
                    node: 0,
                    detail: "one or more sampled property checks failed".into(),
                })
            }
        }
    }
}

fn parse_horizons(spec: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = spec.split("..").collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|e| Error::Config(format!("bad horizon exponent {s:?}: {e}")))
    };
    match parts.as_slice() {
        [single] => {
            let k = parse(single)?;
            Ok((k, k))
        }
        [lo, hi] => {
            let lo = parse(lo)?;
            let hi = parse(hi)?;
            if lo > hi {
                return Err(Error::Config(format!("empty horizon range {spec:?}")));
            }
            Ok((lo, hi))
        }
        _ => Err(Error::Config(format!(
            "horizons must look like `9..13`, got {spec:?}"
        ))),
    }
}

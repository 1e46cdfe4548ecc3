//! Run orchestration and persistence: trace/metrics CSVs, summary JSON,
//! sweep harness, and the sampled property-check command.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! re-reading a trace reproduces the exact bit patterns and identical
//! configurations produce byte-identical artifacts (the summary timestamp is
//! the single non-deterministic field, isolated in `generated_at`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::algorithm::{run, Mode, RoundRecord, RunOptions, RunTrace, Schedule};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    comparator_path, consensus_error_check, dynamic_regret, dynamic_regret_recomputed,
    fit_curves, slope_estimate, theorem_bounds, BoundConstants, ComparatorPath,
};
use crate::mirror::MirrorMap;
use crate::network::WeightMatrix;
use crate::problems::{certify_constants, Problem, Suite};
use crate::vecops;

/// Tolerance used by pipeline comparator solves.
pub const COMPARATOR_TOL: f64 = 1e-7;

/// Exit-status classes for drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Success,
    ConfigError,
    InvariantViolation,
    SolverFailure,
    Other,
}

pub fn classify(err: &Error) -> ExitClass {
    match err {
        Error::Config(_) => ExitClass::ConfigError,
        Error::Invariant { .. } => ExitClass::InvariantViolation,
        Error::Solver { .. } => ExitClass::SolverFailure,
        _ => ExitClass::Other,
    }
}

fn invariant_statement(name: &str) -> &'static str {
    match name {
        "dual_nonnegative" => "q_{i,t} >= 0 coordinate-wise",
        "dual_norm_bound" => "||q_{i,t}|| <= F / beta_t",
        "iterate_feasible" => "y_{i,t} and x_{i,t} lie in the feasible set",
        "finite_iterates" => "iterates remain finite",
        "consensus_error_bound" => {
            "||x_{i,t} - xbar_t|| <= sum_tau sqrt(n) sigma2^{t-tau} (G alpha/mu)(1 + F/beta)"
        }
        _ => "unknown invariant",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Write a machine-readable failure report and return the original error.
fn report_failure(out_dir: &Path, err: Error) -> Error {
    let body = match &err {
        Error::Invariant {
            name,
            t,
            node,
            detail,
        } => json!({
            "kind": "invariant_violation",
            "invariant": name,
            "statement": invariant_statement(name),
            "t": t,
            "node": node,
            "detail": detail,
        }),
        Error::Solver {
            message,
            diagnostics,
        } => json!({
            "kind": "solver_failure",
            "message": message,
            "iterations": diagnostics.iterations,
            "gradient_mapping": diagnostics.gradient_mapping,
            "max_violation": diagnostics.max_violation,
        }),
        other => json!({ "kind": "error", "message": other.to_string() }),
    };
    let path = out_dir.join("failure.json");
    let _ = std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap());
    err
}

fn float(v: f64) -> String {
    format!("{v}")
}

/// Serialize a trace to CSV (one row per (t, i)).
pub fn trace_to_csv(trace: &RunTrace) -> String {
    let (d, m) = (trace.dim, trace.constraints);
    let mut header = String::from("t,i,alpha,beta,gamma");
    for k in 0..d {
        let _ = write!(header, ",x_{k}");
    }
    for k in 0..d {
        let _ = write!(header, ",y_{k}");
    }
    for k in 0..m {
        let _ = write!(header, ",q_{k}");
    }
    for k in 0..d {
        let _ = write!(header, ",a_{k}");
    }
    for k in 0..m {
        let _ = write!(header, ",b_{k}");
    }
    header.push_str(",f");
    for k in 0..m {
        let _ = write!(header, ",g_{k}");
    }
    let mut out = header;
    out.push('\n');
    for rec in &trace.records {
        for i in 0..trace.agents {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                rec.t,
                i,
                float(rec.alpha),
                float(rec.beta),
                float(rec.gamma)
            );
            for group in [&rec.x[i], &rec.y[i], &rec.q[i], &rec.a_dir[i], &rec.b_sur[i]] {
                for v in group.iter() {
                    let _ = write!(out, ",{}", float(*v));
                }
            }
            let _ = write!(out, ",{}", float(rec.f_at_x[i]));
            for v in rec.g_at_x[i].iter() {
                let _ = write!(out, ",{}", float(*v));
            }
            out.push('\n');
        }
    }
    out
}

/// Parse a trace CSV produced by [`trace_to_csv`].
pub fn trace_from_csv(text: &str, agents: usize, d: usize, m: usize) -> Result<RunTrace> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Domain("empty trace file".into()))?;
    let expected_cols = 5 + 3 * d + 3 * m + 1;
    if header.split(',').count() != expected_cols {
        return Err(Error::Dimension(format!(
            "trace header has {} columns, expected {expected_cols}",
            header.split(',').count()
        )));
    }
    let mut records: Vec<RoundRecord> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Dimension(format!(
                "trace line {} has {} columns, expected {expected_cols}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad float {s:?} on line {}: {e}", lineno + 2)))
        };
        let t: usize = fields[0]
            .parse()
            .map_err(|e| Error::Domain(format!("bad round index on line {}: {e}", lineno + 2)))?;
        let i: usize = fields[1]
            .parse()
            .map_err(|e| Error::Domain(format!("bad node index on line {}: {e}", lineno + 2)))?;
        if records.last().map(|r| r.t) != Some(t) {
            records.push(RoundRecord {
                t,
                alpha: parse(fields[2])?,
                beta: parse(fields[3])?,
                gamma: parse(fields[4])?,
                x: vec![Vec::new(); agents],
                y: vec![Vec::new(); agents],
                q: vec![Vec::new(); agents],
                a_dir: vec![Vec::new(); agents],
                b_sur: vec![Vec::new(); agents],
                f_at_x: vec![0.0; agents],
                g_at_x: vec![Vec::new(); agents],
                clip_deviation: 0.0,
            });
        }
        let rec = records.last_mut().unwrap();
        if i >= agents {
            return Err(Error::Dimension(format!(
                "node index {i} out of range on line {}",
                lineno + 2
            )));
        }
        let mut cursor = 5;
        let take = |len: usize, fields: &[&str], cursor: &mut usize| -> Result<Vec<f64>> {
            let vals = fields[*cursor..*cursor + len]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<Vec<f64>>>()?;
            *cursor += len;
            Ok(vals)
        };
        rec.x[i] = take(d, &fields, &mut cursor)?;
        rec.y[i] = take(d, &fields, &mut cursor)?;
        rec.q[i] = take(m, &fields, &mut cursor)?;
        rec.a_dir[i] = take(d, &fields, &mut cursor)?;
        rec.b_sur[i] = take(m, &fields, &mut cursor)?;
        rec.f_at_x[i] = parse(fields[cursor])?;
        cursor += 1;
        rec.g_at_x[i] = take(m, &fields, &mut cursor)?;
    }
    Ok(RunTrace {
        agents,
        dim: d,
        constraints: m,
        horizon: records.len(),
        records,
        network_loss: Vec::new(),
        fit_prefix: Vec::new(),
        fit_sq_prefix: Vec::new(),
        fit_diag_prefix: Vec::new(),
        violations: Vec::new(),
        clip: Default::default(),
    })
}

fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Horizons at which prefix metrics are logged: powers of two up to T, plus T.
pub fn logged_horizons(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut h = 1usize;
    while h <= horizon {
        out.push(h);
        h *= 2;
    }
    if out.last() != Some(&horizon) && horizon > 0 {
        out.push(horizon);
    }
    out
}

/// One metrics row at a logged horizon.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricsRow {
    pub horizon: usize,
    pub regret: f64,
    pub fit: f64,
    pub fit_sq: f64,
    pub fit_diag: f64,
    pub c_t_star: f64,
    pub regret_rhs: f64,
    pub fit_sq_rhs: f64,
}

fn metrics_rows(
    horizons: &[usize],
    regret_prefix: &[f64],
    fit_prefix: &[f64],
    fit_sq_prefix: &[f64],
    fit_diag_prefix: &[f64],
    path: &ComparatorPath,
    constants: &BoundConstants,
) -> Vec<MetricsRow> {
    horizons
        .iter()
        .filter(|&&h| h >= 1 && h <= regret_prefix.len())
        .map(|&h| {
            let c_star = path.variation_prefix[h - 1];
            let (regret_rhs, fit_sq_rhs) = theorem_bounds(constants, h, c_star);
            MetricsRow {
                horizon: h,
                regret: regret_prefix[h - 1],
                fit: fit_prefix[h - 1],
                fit_sq: fit_sq_prefix[h - 1],
                fit_diag: fit_diag_prefix[h - 1],
                c_t_star: c_star,
                regret_rhs,
                fit_sq_rhs,
            }
        })
        .collect()
}

fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("T,regret,fit,fit_sq,C_T_star,regret_rhs,fit_sq_rhs,fit_diag\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.horizon,
            float(r.regret),
            float(r.fit),
            float(r.fit_sq),
            float(r.c_t_star),
            float(r.regret_rhs),
            float(r.fit_sq_rhs),
            float(r.fit_diag)
        );
    }
    out
}

const PLOTS_GP: &str = r#"# Log-log metric curves against their horizon bounds.
# Usage: gnuplot plots.gp   (expects metrics.csv in the working directory)
set datafile separator ","
set terminal pngcairo size 900,600
set logscale xy
set xlabel "T"
set grid
set key left top

set output "regret.png"
set ylabel "dynamic regret"
plot "metrics.csv" skip 1 using 1:2 with linespoints title "regret", \
     "metrics.csv" skip 1 using 1:6 with lines title "regret bound"

set output "fit.png"
set ylabel "fit"
plot "metrics.csv" skip 1 using 1:3 with linespoints title "fit", \
     "metrics.csv" skip 1 using 1:4 with linespoints title "squared-fit aggregate", \
     "metrics.csv" skip 1 using 1:7 with lines title "squared-fit bound"
"#;

/// Artifacts and headline numbers produced by a pipeline run.
#[derive(Debug)]
pub struct PipelineOutput {
    pub out_dir: PathBuf,
    pub rows: Vec<MetricsRow>,
    pub summary: serde_json::Value,
    pub dual_bound_max_ratio: f64,
    pub consensus_min_margin: f64,
    pub violations: usize,
}

fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn bound_constants(
    suite: &Suite,
    map: &MirrorMap,
    weights: &WeightMatrix,
    schedule: &Schedule,
) -> BoundConstants {
    let c = suite.constants();
    BoundConstants::compute(
        c.f_bound,
        c.grad_bound,
        c.lipschitz,
        map.k_bound(),
        map.mu(),
        suite.feasible_set().diameter(),
        suite.agents(),
        weights.sigma2(),
        schedule,
    )
}

/// Worst observed `||q|| * beta / F` over the trace (must stay <= 1).
pub fn dual_bound_max_ratio(trace: &RunTrace, problem: &(impl Problem + ?Sized)) -> f64 {
    let f = problem.constants().f_bound;
    trace
        .records
        .iter()
        .flat_map(|rec| rec.q.iter().map(move |q| vecops::norm(q) * rec.beta / f))
        .fold(0.0, f64::max)
}

/// Full pipeline: generate, run, evaluate, persist.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<PipelineOutput> {
    config.validate()?;
    create_dir(out_dir)?;
    let weights = config.build_weights()?;
    let suite = config.build_suite()?;
    let map = config.build_mirror()?;
    let schedule = config.build_schedule()?;
    let opts = RunOptions {
        mode: config.mode,
        threads: config.threads,
        corrupt_dual: corrupt_hook_from_env(),
    };

    let trace = run(&suite, &weights, &map, &schedule, &opts)
        .map_err(|e| report_failure(out_dir, e))?;

    let trace_csv = trace_to_csv(&trace);
    let trace_hash = sha256_hex(&trace_csv);
    write_file(&out_dir.join("trace.csv"), &trace_csv)?;

    let path = comparator_path(&suite, trace.horizon, COMPARATOR_TOL, config.threads)
        .map_err(|e| report_failure(out_dir, e))?;
    let regret_prefix = dynamic_regret(&trace, &path, &suite)?;
    let constants = bound_constants(&suite, &map, &weights, &schedule);
    let horizons = logged_horizons(trace.horizon);
    let rows = metrics_rows(
        &horizons,
        &regret_prefix,
        &trace.fit_prefix,
        &trace.fit_sq_prefix,
        &trace.fit_diag_prefix,
        &path,
        &constants,
    );
    write_file(&out_dir.join("metrics.csv"), &metrics_to_csv(&rows))?;
    write_file(&out_dir.join("plots.gp"), PLOTS_GP)?;

    let consensus = consensus_error_check(&trace, &weights, &suite, map.mu(), 1e-9)?;
    let dual_ratio = dual_bound_max_ratio(&trace, &suite);

    let summary = json!({
        "config": config,
        "sigma2": weights.sigma2(),
        "constants": constants,
        "trace_sha256": trace_hash,
        "final": rows.last().map(|r| json!({
            "T": r.horizon,
            "regret": r.regret,
            "fit": r.fit,
            "fit_sq": r.fit_sq,
            "fit_diag": r.fit_diag,
            "C_T_star": r.c_t_star,
            "regret_rhs": r.regret_rhs,
            "fit_sq_rhs": r.fit_sq_rhs,
        })),
        "checks": {
            "dual_bound_max_ratio": dual_ratio,
            "consensus_min_margin": consensus.min_margin,
            "consensus_failures": consensus.failures.len(),
            "violations": trace.violations,
        },
        "clip": trace.clip,
        "generated_at": unix_timestamp(),
    });
    write_file(
        &out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).unwrap(),
    )?;

    Ok(PipelineOutput {
        out_dir: out_dir.to_path_buf(),
        rows,
        summary,
        dual_bound_max_ratio: dual_ratio,
        consensus_min_margin: consensus.min_margin,
        violations: trace.violations.len(),
    })
}

/// Test hook (see `CorruptDual`): `DOCO_CORRUPT_DUAL="t,node,scale"`.
fn corrupt_hook_from_env() -> Option<crate::algorithm::CorruptDual> {
    let raw = std::env::var("DOCO_CORRUPT_DUAL").ok()?;
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return None;
    }
    Some(crate::algorithm::CorruptDual {
        t: parts[0].parse().ok()?,
        node: parts[1].parse().ok()?,
        scale: parts[2].parse().ok()?,
    })
}

/// Recompute metrics from a stored trace directory (`trace.csv` +
/// `summary.json`), rewriting `metrics.csv`. Returns a report value.
pub fn evaluate_dir(trace_dir: &Path, threads: usize) -> Result<serde_json::Value> {
    let summary_path = trace_dir.join("summary.json");
    let summary_text =
        std::fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let summary: serde_json::Value = serde_json::from_str(&summary_text)
        .map_err(|e| Error::Config(format!("{}: {e}", summary_path.display())))?;
    let config: RunConfig = serde_json::from_value(
        summary
            .get("config")
            .cloned()
            .ok_or_else(|| Error::Config("summary.json lacks a config echo".into()))?,
    )
    .map_err(|e| Error::Config(format!("summary.json config echo: {e}")))?;
    config.validate()?;

    let trace_path = trace_dir.join("trace.csv");
    let trace_text = std::fs::read_to_string(&trace_path).map_err(|e| Error::io(&trace_path, e))?;
    let hash_matches = summary
        .get("trace_sha256")
        .and_then(|v| v.as_str())
        .map(|h| h == sha256_hex(&trace_text));

    let suite = config.build_suite()?;
    let weights = config.build_weights()?;
    let map = config.build_mirror()?;
    let schedule = config.build_schedule()?;
    let trace = trace_from_csv(&trace_text, config.problem.n, config.problem.d, config.problem.m)?;

    let path = comparator_path(&suite, trace.horizon, COMPARATOR_TOL, threads)?;
    let regret_prefix = dynamic_regret_recomputed(&trace, &path, &suite)?;
    let fits = fit_curves(&trace, &suite);
    let constants = bound_constants(&suite, &map, &weights, &schedule);
    let horizons = logged_horizons(trace.horizon);
    let rows = metrics_rows(
        &horizons,
        &regret_prefix,
        &fits.fit,
        &fits.fit_sq,
        &fits.fit_diag,
        &path,
        &constants,
    );
    write_file(&trace_dir.join("metrics.csv"), &metrics_to_csv(&rows))?;

    let consensus = consensus_error_check(&trace, &weights, &suite, map.mu(), 1e-9)?;
    Ok(json!({
        "rows": rows,
        "trace_hash_match": hash_matches,
        "dual_bound_max_ratio": dual_bound_max_ratio(&trace, &suite),
        "consensus_failures": consensus.failures.len(),
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Inclusive horizon exponents: runs cover T = 2^lo ..= 2^hi.
    pub exp_lo: u32,
    pub exp_hi: u32,
    /// Number of seeds for the per-horizon median (1 disables).
    pub median_seeds: usize,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub rows: Vec<MetricsRow>,
    pub slopes: Vec<(String, crate::evaluation::SlopeFit)>,
}

/// Horizon sweep: one run at the largest horizon per seed (the online
/// iterates do not depend on the horizon), prefix metrics logged at each
/// power of two, per-metric log-log slopes, and bound-domination rows.
pub fn sweep(config: &RunConfig, out_dir: &Path, opts: &SweepOptions) -> Result<SweepOutput> {
    if opts.exp_lo > opts.exp_hi {
        return Err(Error::Config(format!(
            "empty horizon range {}..{}",
            opts.exp_lo, opts.exp_hi
        )));
    }
    if opts.median_seeds == 0 || opts.median_seeds % 2 == 0 {
        return Err(Error::Config(
            "median_seeds must be a positive odd count".into(),
        ));
    }
    config.validate()?;
    create_dir(out_dir)?;
    let t_max = 1usize << opts.exp_hi;
    let horizons: Vec<usize> = (opts.exp_lo..=opts.exp_hi).map(|k| 1usize << k).collect();

    let mut per_seed_rows: Vec<Vec<MetricsRow>> = Vec::new();
    for s in 0..opts.median_seeds {
        let mut cfg = config.clone();
        cfg.problem.horizon = t_max;
        cfg.seed = config.seed + s as u64;
        cfg.problem.seed = Some(cfg.problem.seed.unwrap_or(config.seed) + s as u64);

        let weights = cfg.build_weights()?;
        let suite = cfg.build_suite()?;
        let map = cfg.build_mirror()?;
        let schedule = cfg.build_schedule()?;
        let run_opts = RunOptions {
            mode: cfg.mode,
            threads: cfg.threads,
            corrupt_dual: None,
        };
        let trace = run(&suite, &weights, &map, &schedule, &run_opts)
            .map_err(|e| report_failure(out_dir, e))?;
        let path = comparator_path(&suite, t_max, COMPARATOR_TOL, cfg.threads)
            .map_err(|e| report_failure(out_dir, e))?;
        let regret_prefix = dynamic_regret(&trace, &path, &suite)?;
        let constants = bound_constants(&suite, &map, &weights, &schedule);
        per_seed_rows.push(metrics_rows(
            &horizons,
            &regret_prefix,
            &trace.fit_prefix,
            &trace.fit_sq_prefix,
            &trace.fit_diag_prefix,
            &path,
            &constants,
        ));
    }

    // Per-horizon, per-column median across seeds.
    let median = |extract: &dyn Fn(&MetricsRow) -> f64, idx: usize| -> f64 {
        let mut vals: Vec<f64> = per_seed_rows.iter().map(|rows| extract(&rows[idx])).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals[vals.len() / 2]
    };
    let rows: Vec<MetricsRow> = (0..horizons.len())
        .map(|idx| MetricsRow {
            horizon: horizons[idx],
            regret: median(&|r| r.regret, idx),
            fit: median(&|r| r.fit, idx),
            fit_sq: median(&|r| r.fit_sq, idx),
            fit_diag: median(&|r| r.fit_diag, idx),
            c_t_star: median(&|r| r.c_t_star, idx),
            regret_rhs: median(&|r| r.regret_rhs, idx),
            fit_sq_rhs: median(&|r| r.fit_sq_rhs, idx),
        })
        .collect();

    write_file(&out_dir.join("metrics.csv"), &metrics_to_csv(&rows))?;
    write_file(&out_dir.join("plots.gp"), PLOTS_GP)?;

    let mut slopes = Vec::new();
    let mut slopes_csv = String::from("metric,slope,intercept,points_used\n");
    for (name, extract) in [
        ("regret", &(|r: &MetricsRow| r.regret) as &dyn Fn(&MetricsRow) -> f64),
        ("fit", &|r: &MetricsRow| r.fit),
        ("fit_sq", &|r: &MetricsRow| r.fit_sq),
    ] {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.horizon as f64, extract(r))).collect();
        match slope_estimate(&pts) {
            Ok(fit) => {
                let _ = writeln!(
                    slopes_csv,
                    "{name},{},{},{}",
                    float(fit.slope),
                    float(fit.intercept),
                    fit.used
                );
                slopes.push((name.to_string(), fit));
            }
            Err(e) => {
                let _ = writeln!(slopes_csv, "{name},nan,nan,0 # {e}");
            }
        }
    }
    write_file(&out_dir.join("slopes.csv"), &slopes_csv)?;

    let mut bounds_csv =
        String::from("T,regret,regret_rhs,regret_bounded,fit_sq,fit_sq_rhs,fit_sq_bounded\n");
    for r in &rows {
        let _ = writeln!(
            bounds_csv,
            "{},{},{},{},{},{},{}",
            r.horizon,
            float(r.regret),
            float(r.regret_rhs),
            r.regret <= r.regret_rhs,
            float(r.fit_sq),
            float(r.fit_sq_rhs),
            r.fit_sq <= r.fit_sq_rhs
        );
    }
    write_file(&out_dir.join("bounds.csv"), &bounds_csv)?;

    Ok(SweepOutput { rows, slopes })
}

/// One line of the sampled property-check report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

/// Sampled runtime verification of the configured objects: network algebra,
/// Bregman/projection properties, problem constants, convexity, and a short
/// strict engine run.
pub fn check(config: &RunConfig) -> Result<CheckReport> {
    use rand::Rng;

    config.validate()?;
    let mut lines = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        lines.push(CheckLine {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    let weights = config.build_weights()?;
    let set = config.feasible_set.clone();
    let map = config.build_mirror()?;
    let d = set.dim();
    let mut rng = crate::rngs::substream(config.seed, "check");

    // Mixing preserves the average and contracts disagreement.
    let n = weights.n();
    let mut max_mean_drift: f64 = 0.0;
    let mut contraction_ok = true;
    for _ in 0..100 {
        let ys: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mixed = weights.mix(&ys)?;
        let mean_of = |vs: &[Vec<f64>]| -> Vec<f64> {
            let mut mean = vec![0.0; d];
            for v in vs {
                vecops::axpy(&mut mean, 1.0 / n as f64, v);
            }
            mean
        };
        let m_in = mean_of(&ys);
        let m_out = mean_of(&mixed);
        max_mean_drift = max_mean_drift.max(vecops::dist(&m_in, &m_out));
        let dev = |vs: &[Vec<f64>], mean: &[f64]| -> f64 {
            vs.iter().map(|v| vecops::dist(v, mean).powi(2)).sum::<f64>().sqrt()
        };
        let before = dev(&ys, &m_in);
        let after = dev(&mixed, &m_in);
        if after > weights.sigma2() * before * (1.0 + 1e-10) + 1e-12 {
            contraction_ok = false;
        }
    }
    push(
        "mix_preserves_average",
        max_mean_drift <= 1e-12,
        format!("max mean drift {max_mean_drift:.3e}"),
    );
    push(
        "mix_contracts_disagreement",
        contraction_ok,
        format!("sigma2 = {}", weights.sigma2()),
    );

    // Bregman lower bound, separate convexity, Lipschitz, boundedness,
    // projection inequality, non-expansiveness.
    let samples = 500;
    let mut lb_worst: f64 = 0.0;
    let mut sc_worst: f64 = 0.0;
    let mut lip_worst: f64 = 0.0;
    let mut bound_worst: f64 = 0.0;
    for _ in 0..samples {
        let x = map.sample_paired(&set, &mut rng);
        let y = map.sample_paired(&set, &mut rng);
        let z = map.sample_paired(&set, &mut rng);
        let dxy = map.bregman(&x, &y)?;
        lb_worst = lb_worst.max(0.5 * map.mu() * vecops::dist(&x, &y).powi(2) - dxy);
        let lam: f64 = rng.gen_range(0.0..1.0);
        let mix: Vec<f64> = y.iter().zip(&z).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        sc_worst = sc_worst
            .max(map.bregman(&x, &mix)? - lam * dxy - (1.0 - lam) * map.bregman(&x, &z)?);
        lip_worst = lip_worst
            .max((dxy - map.bregman(&z, &y)?).abs() - map.k_bound() * vecops::dist(&x, &z));
        bound_worst = bound_worst.max(dxy - map.k_bound() * set.diameter());
    }
    push("bregman_lower_bound", lb_worst <= 1e-9, format!("worst excess {lb_worst:.3e}"));
    push("bregman_separate_convexity", sc_worst <= 1e-9, format!("worst excess {sc_worst:.3e}"));
    push("bregman_lipschitz", lip_worst <= 1e-9, format!("worst excess {lip_worst:.3e}"));
    push("bregman_bounded", bound_worst <= 1e-9, format!("worst excess {bound_worst:.3e}"));

    let mut proj_worst: f64 = 0.0;
    for _ in 0..20 {
        let z = map.sample_paired(&set, &mut rng);
        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha = rng.gen_range(0.05..1.0);
        let y = map.regularized_projection(&set, &z, &a, alpha)?;
        for _ in 0..50 {
            let x = map.sample_paired(&set, &mut rng);
            let lhs = alpha * (vecops::dot(&y, &a) - vecops::dot(&x, &a));
            let rhs = map.bregman(&x, &z)? - map.bregman(&x, &y)? - map.bregman(&y, &z)?;
            proj_worst = proj_worst.max(lhs - rhs);
        }
    }
    push(
        "regularized_projection_inequality",
        proj_worst <= 1e-9,
        format!("worst excess {proj_worst:.3e}"),
    );

    let mut nonexp_worst: f64 = 0.0;
    for _ in 0..samples {
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let pu = crate::mirror::nonneg_project(&u);
        let pv = crate::mirror::nonneg_project(&v);
        nonexp_worst = nonexp_worst.max(vecops::dist(&pu, &pv) - vecops::dist(&u, &v));
    }
    push(
        "orthant_projection_nonexpansive",
        nonexp_worst <= 1e-12,
        format!("worst excess {nonexp_worst:.3e}"),
    );

    // Problem constants and convexity.
    let suite = config.build_suite()?;
    let cert = certify_constants(&suite, 1000)?;
    push(
        "constants_certified",
        cert.passed,
        format!(
            "declared (F, G, L) = ({}, {}, {}), empirical = ({:.4}, {:.4}, {:.4})",
            cert.declared.f_bound,
            cert.declared.grad_bound,
            cert.declared.lipschitz,
            cert.empirical.f_bound,
            cert.empirical.grad_bound,
            cert.empirical.lipschitz
        ),
    );

    let mut cvx_worst: f64 = 0.0;
    let mut g_buf = vec![0.0; suite.constraints()];
    let mut g_x = vec![0.0; suite.constraints()];
    let mut g_y = vec![0.0; suite.constraints()];
    for _ in 0..samples {
        let i = rng.gen_range(0..suite.agents());
        let t = rng.gen_range(0..=suite.horizon());
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        cvx_worst = cvx_worst.max(
            suite.objective(i, t, &mid)
                - 0.5 * (suite.objective(i, t, &x) + suite.objective(i, t, &y)),
        );
        suite.constraint(i, t, &mid, &mut g_buf);
        suite.constraint(i, t, &x, &mut g_x);
        suite.constraint(i, t, &y, &mut g_y);
        for k in 0..suite.constraints() {
            cvx_worst = cvx_worst.max(g_buf[k] - 0.5 * (g_x[k] + g_y[k]));
        }
    }
    push("midpoint_convexity", cvx_worst <= 1e-9, format!("worst excess {cvx_worst:.3e}"));

    // Strictly feasible point exists for every round.
    let witness = suite.strictly_feasible_point();
    let mut feasible = set.contains(&witness, 1e-12);
    'outer: for t in 1..=suite.horizon() {
        for i in 0..suite.agents() {
            suite.constraint(i, t, &witness, &mut g_buf);
            if g_buf.iter().any(|&v| v >= 0.0) {
                feasible = false;
                break 'outer;
            }
        }
    }
    push("feasible_witness", feasible, "strict feasibility at every round".into());

    // Short strict engine run with invariant checks on.
    let mut short_cfg = config.clone();
    short_cfg.problem.horizon = config.problem.horizon.min(64);
    let short_suite = short_cfg.build_suite()?;
    let schedule = short_cfg.build_schedule()?;
    let opts = RunOptions {
        mode: Mode::Strict,
        threads: config.threads,
        corrupt_dual: None,
    };
    match run(&short_suite, &weights, &map, &schedule, &opts) {
        Ok(trace) => {
            let ratio = dual_bound_max_ratio(&trace, &short_suite);
            push(
                "short_run_invariants",
                true,
                format!("T = {}, dual bound ratio {ratio:.3e}", trace.horizon),
            );
        }
        Err(e) => push("short_run_invariants", false, e.to_string()),
    }

    Ok(CheckReport { lines })
}

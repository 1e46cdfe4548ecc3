//! Comparator oracle, dynamic regret, fit, path variation, bound constants,
//! network-error checks, and log-log slope estimation.
//!
//! The comparator at round t is the minimizer of the network-average
//! objective subject to every agent's constraints, computed by a quadratic
//! penalty continuation with projected-gradient inner solves. The solve is
//! deterministic: fixed initialization at the set center and a fixed step
//! rule, which also serves as the tie-break when the argmin is not a
//! singleton.

use serde::Serialize;

use crate::algorithm::{RunTrace, Schedule};
use crate::error::{Error, Result, SolveDiagnostics};
use crate::network::WeightMatrix;
use crate::problems::{global_objective, global_objective_grad, Problem};
use crate::vecops;

/// Penalty schedule: 10^k for k = 0..=6, extended adaptively (up to 10^12)
/// when the quadratic-penalty bias alone exceeds the requested feasibility
/// tolerance (the bias scales as multiplier / penalty weight).
const PENALTY_STAGES: i32 = 6;
const MAX_PENALTY_STAGES: i32 = 12;
/// Inner projected-gradient iteration cap per stage.
const MAX_INNER_ITERS: usize = 10_000;

/// Diagnostics for one comparator solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveDiag {
    pub iterations: usize,
    pub gradient_mapping: f64,
    pub max_violation: f64,
}

/// Per-round constrained minimizers and their accumulated path variation.
#[derive(Debug, Clone)]
pub struct ComparatorPath {
    /// x*_t for t = 1..=T (index t - 1).
    pub points: Vec<Vec<f64>>,
    /// Prefix path variation: entry t-1 holds C*_t computed with the
    /// final-displacement-zero convention (x*_{t+1} := x*_t).
    pub variation_prefix: Vec<f64>,
    pub diagnostics: Vec<SolveDiag>,
}

impl ComparatorPath {
    pub fn c_t_star(&self) -> f64 {
        self.variation_prefix.last().copied().unwrap_or(0.0)
    }
}

/// Total path variation of an explicit comparator sequence, with the final
/// displacement taken as zero.
pub fn path_variation(points: &[Vec<f64>]) -> f64 {
    points
        .windows(2)
        .map(|w| vecops::dist(&w[1], &w[0]))
        .sum()
}

fn max_violation(problem: &(impl Problem + ?Sized), t: usize, x: &[f64]) -> f64 {
    let m = problem.constraints();
    let mut g = vec![0.0; m];
    let mut worst = f64::NEG_INFINITY;
    for i in 0..problem.agents() {
        problem.constraint(i, t, x, &mut g);
        for &v in &g {
            worst = worst.max(v);
        }
    }
    worst
}

/// Gradient of `f_t + rho * sum_i ||[g_{i,t}]_+||^2` at x.
fn penalty_grad(problem: &(impl Problem + ?Sized), t: usize, x: &[f64], rho: f64) -> Vec<f64> {
    let d = problem.dim();
    let m = problem.constraints();
    let mut grad = global_objective_grad(problem, t, x);
    let mut g = vec![0.0; m];
    let mut jac = vec![0.0; m * d];
    for i in 0..problem.agents() {
        problem.constraint(i, t, x, &mut g);
        if g.iter().all(|&v| v <= 0.0) {
            continue;
        }
        problem.constraint_jac(i, t, x, &mut jac);
        for k in 0..m {
            let active = g[k].max(0.0);
            if active > 0.0 {
                vecops::axpy(&mut grad, 2.0 * rho * active, &jac[k * d..(k + 1) * d]);
            }
        }
    }
    grad
}

/// Solve the round-t comparator problem to tolerance `tol` (both first-order
/// stationarity of the final penalty stage and constraint violation).
pub fn comparator_oracle(
    problem: &(impl Problem + ?Sized),
    t: usize,
    tol: f64,
) -> Result<(Vec<f64>, SolveDiag)> {
    let set = problem.feasible_set();
    let n = problem.agents() as f64;
    let g_bound = problem.constants().grad_bound;
    let mut x = set.center();
    let mut total_iters = 0usize;
    let mut gm;
    // Converge each stage a decade below the requested tolerance so the
    // final penalty bias dominates the optimization error.
    let gm_tol = 0.1 * tol;

    let mut k = 0;
    loop {
        let rho = 10f64.powi(k);
        // Smoothness of the penalized objective: objective curvature plus
        // 2 rho sum_i ||J_i||^2 on the active side.
        let lipschitz = problem.smoothness() + 2.0 * rho * n * g_bound * g_bound;
        let step = 1.0 / lipschitz.max(1e-12);
        gm = f64::INFINITY;
        for _ in 0..MAX_INNER_ITERS {
            total_iters += 1;
            let grad = penalty_grad(problem, t, &x, rho);
            let mut shifted = x.clone();
            vecops::axpy(&mut shifted, -step, &grad);
            let next = set.project(&shifted);
            gm = vecops::dist(&x, &next) * lipschitz;
            x = next;
            if gm <= gm_tol {
                break;
            }
        }
        k += 1;
        if k > PENALTY_STAGES
            && (max_violation(problem, t, &x) <= tol || k > MAX_PENALTY_STAGES)
        {
            break;
        }
    }

    let viol = max_violation(problem, t, &x).max(0.0);
    let diag = SolveDiag {
        iterations: total_iters,
        gradient_mapping: gm,
        max_violation: viol,
    };
    if gm > tol || viol > tol {
        return Err(Error::Solver {
            message: format!("comparator solve at t={t} missed tolerance {tol:.1e}"),
            diagnostics: SolveDiagnostics {
                iterations: diag.iterations,
                gradient_mapping: diag.gradient_mapping,
                max_violation: diag.max_violation,
            },
        });
    }
    Ok((x, diag))
}

/// Solve the comparator problems for every round (optionally on several
/// workers; results are written by round index, so output is deterministic).
pub fn comparator_path(
    problem: &(impl Problem + ?Sized),
    horizon: usize,
    tol: f64,
    threads: usize,
) -> Result<ComparatorPath> {
    let solves: Vec<Result<(Vec<f64>, SolveDiag)>> = if threads > 1 && horizon > 1 {
        let workers = threads.min(horizon);
        let chunk = horizon.div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w * chunk + 1;
                    let hi = ((w + 1) * chunk).min(horizon);
                    scope.spawn(move || {
                        (lo..=hi)
                            .map(|t| comparator_oracle(problem, t, tol))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("comparator worker panicked"))
                .collect()
        })
    } else {
        (1..=horizon)
            .map(|t| comparator_oracle(problem, t, tol))
            .collect()
    };

    let mut points = Vec::with_capacity(horizon);
    let mut diagnostics = Vec::with_capacity(horizon);
    for solve in solves {
        let (x, diag) = solve?;
        points.push(x);
        diagnostics.push(diag);
    }
    let mut variation_prefix = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    for t in 0..horizon {
        if t > 0 {
            acc += vecops::dist(&points[t], &points[t - 1]);
        }
        variation_prefix.push(acc);
    }
    Ok(ComparatorPath {
        points,
        variation_prefix,
        diagnostics,
    })
}

/// Prefix dynamic regret per round: partial sums of
/// `(1/n) sum_i f_t(x_{i,t}) - f_t(x*_t)`, using the online loss
/// accumulator stored in the trace.
pub fn dynamic_regret(
    trace: &RunTrace,
    path: &ComparatorPath,
    problem: &(impl Problem + ?Sized),
) -> Result<Vec<f64>> {
    if trace.records.len() != path.points.len() {
        return Err(Error::Dimension(format!(
            "trace has {} rounds but comparator path has {}",
            trace.records.len(),
            path.points.len()
        )));
    }
    let mut out = Vec::with_capacity(trace.records.len());
    let mut acc = 0.0;
    for (idx, rec) in trace.records.iter().enumerate() {
        let comparator_loss = global_objective(problem, rec.t, &path.points[idx]);
        acc += trace.network_loss[idx] - comparator_loss;
        out.push(acc);
    }
    Ok(out)
}

/// Dynamic regret recomputed from recorded actions alone (independent of the
/// engine's online loss accumulator).
pub fn dynamic_regret_recomputed(
    trace: &RunTrace,
    path: &ComparatorPath,
    problem: &(impl Problem + ?Sized),
) -> Result<Vec<f64>> {
    if trace.records.len() != path.points.len() {
        return Err(Error::Dimension("trace/path length mismatch".into()));
    }
    let n = trace.agents as f64;
    let mut out = Vec::with_capacity(trace.records.len());
    let mut acc = 0.0;
    for (idx, rec) in trace.records.iter().enumerate() {
        let avg_loss = rec
            .x
            .iter()
            .map(|x| global_objective(problem, rec.t, x))
            .sum::<f64>()
            / n;
        acc += avg_loss - global_objective(problem, rec.t, &path.points[idx]);
        out.push(acc);
    }
    Ok(out)
}

/// Fit curves recomputed from recorded actions (double average over
/// constraint-owner and action-owner agents of the clamped cumulative sums).
#[derive(Debug, Clone)]
pub struct FitCurves {
    pub fit: Vec<f64>,
    pub fit_sq: Vec<f64>,
    pub fit_diag: Vec<f64>,
}

pub fn fit_curves(trace: &RunTrace, problem: &(impl Problem + ?Sized)) -> FitCurves {
    let n = trace.agents;
    let m = trace.constraints;
    let mut cum = vec![vec![0.0; m]; n * n];
    let mut fit = Vec::with_capacity(trace.records.len());
    let mut fit_sq = Vec::with_capacity(trace.records.len());
    let mut fit_diag = Vec::with_capacity(trace.records.len());
    let mut g = vec![0.0; m];
    for rec in &trace.records {
        for i in 0..n {
            for j in 0..n {
                problem.constraint(i, rec.t, &rec.x[j], &mut g);
                vecops::axpy(&mut cum[i * n + j], 1.0, &g);
            }
        }
        let mut f = 0.0;
        let mut fsq = 0.0;
        let mut fdiag = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sq: f64 = cum[i * n + j].iter().map(|v| v.max(0.0).powi(2)).sum();
                f += sq.sqrt();
                fsq += sq;
                if i == j {
                    fdiag += sq.sqrt();
                }
            }
        }
        let n2 = (n * n) as f64;
        fit.push(f / n2);
        fit_sq.push(fsq / n2);
        fit_diag.push(fdiag / n as f64);
    }
    FitCurves {
        fit,
        fit_sq,
        fit_diag,
    }
}

/// Result of checking the per-round network disagreement bound
/// `||x_{i,t} - xbar_t|| <= sum_{tau<t} sqrt(n) sigma2^{t-tau}
///  (G alpha_{tau+1} / mu)(1 + F / beta_{tau+1})`.
#[derive(Debug, Clone, Serialize)]
pub struct ConsensusReport {
    pub checked: usize,
    pub failures: Vec<(usize, usize)>,
    /// min over (t, i) of rhs - lhs.
    pub min_margin: f64,
    /// max over (t, i) of lhs.
    pub max_disagreement: f64,
}

pub fn consensus_error_check(
    trace: &RunTrace,
    weights: &WeightMatrix,
    problem: &(impl Problem + ?Sized),
    mu: f64,
    tol: f64,
) -> Result<ConsensusReport> {
    let n = trace.agents;
    if weights.n() != n {
        return Err(Error::Dimension("weight matrix does not match trace".into()));
    }
    let sigma2 = weights.sigma2();
    let constants = problem.constants();
    let sqrt_n = (n as f64).sqrt();
    let mut bound = 0.0; // S_t = sigma2 * (S_{t-1} + u_t)
    let mut report = ConsensusReport {
        checked: 0,
        failures: Vec::new(),
        min_margin: f64::INFINITY,
        max_disagreement: 0.0,
    };
    for rec in &trace.records {
        let u_t = sqrt_n * constants.grad_bound * rec.alpha / mu
            * (1.0 + constants.f_bound / rec.beta);
        bound = sigma2 * (bound + u_t);
        let d = trace.dim;
        let mut mean = vec![0.0; d];
        for x in &rec.x {
            vecops::axpy(&mut mean, 1.0 / n as f64, x);
        }
        for (i, x) in rec.x.iter().enumerate() {
            let lhs = vecops::dist(x, &mean);
            let margin = bound + tol - lhs;
            report.checked += 1;
            report.max_disagreement = report.max_disagreement.max(lhs);
            report.min_margin = report.min_margin.min(bound - lhs);
            if margin < 0.0 {
                report.failures.push((rec.t, i));
            }
        }
    }
    if report.checked == 0 {
        report.min_margin = 0.0;
    }
    Ok(report)
}

/// Constants of the regret/fit upper bounds for a given configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundConstants {
    pub f_bound: f64,
    pub grad_bound: f64,
    pub lipschitz: f64,
    pub bregman_lipschitz: f64,
    pub mu: f64,
    pub diameter: f64,
    pub agents: usize,
    pub sigma2: f64,
    pub a: f64,
    pub b: f64,
    pub b1: f64,
    pub r: f64,
    pub r1: f64,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl BoundConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        f_bound: f64,
        grad_bound: f64,
        lipschitz: f64,
        bregman_lipschitz: f64,
        mu: f64,
        diameter: f64,
        agents: usize,
        sigma2: f64,
        schedule: &Schedule,
    ) -> Self {
        let (a, b) = (schedule.a(), schedule.b());
        let (f, g, l, k) = (f_bound, grad_bound, lipschitz, bregman_lipschitz);
        let b1 = 2.0 * f + g * diameter;
        let r = 4.0 * f * l * g * (agents as f64).sqrt() * sigma2
            / (mu * (1.0 - a) * (1.0 - sigma2));
        let r1 = r + b1 * b1 / (2.0 * b) + g * g / (mu * (1.0 - a)) + 2.0 * k * diameter;
        let d = 2.0 + 4.0 * g * g / (mu * (1.0 - a)) + 2.0 / (1.0 - b);
        let d1 = 2.0
            * d
            * (2.0 * f
                + 2.0 * k * diameter
                + b1 * b1 / (2.0 * b)
                + g * g / (mu * (1.0 - a))
                + 2.0 * k * diameter);
        let d2 = 4.0 * k * d;
        let d3 = 16.0 * l * l * r * r;
        BoundConstants {
            f_bound,
            grad_bound,
            lipschitz,
            bregman_lipschitz,
            mu,
            diameter,
            agents,
            sigma2,
            a,
            b,
            b1,
            r,
            r1,
            d,
            d1,
            d2,
            d3,
        }
    }

    /// Exponent of the leading regret term.
    pub fn regret_exponent(&self) -> f64 {
        self.a.max(1.0 - self.a + self.b)
    }

    /// Exponents of the three squared-fit terms.
    pub fn fit_sq_exponents(&self) -> [f64; 3] {
        [
            2.0 - self.b,
            1.0 + self.a - self.b,
            2.0 + 2.0 * self.b - 2.0 * self.a,
        ]
    }
}

/// Right-hand sides of the regret and squared-fit bounds at horizon T.
pub fn theorem_bounds(c: &BoundConstants, horizon: usize, c_t_star: f64) -> (f64, f64) {
    let t = horizon as f64;
    let regret_rhs = c.r1 * t.powf(c.regret_exponent())
        + 2.0 * c.bregman_lipschitz * t.powf(c.a) * c_t_star;
    let [e1, e2, e3] = c.fit_sq_exponents();
    let fit_sq_rhs = c.d1 * t.powf(e1) + c.d2 * t.powf(e2) * c_t_star + c.d3 * t.powf(e3);
    (regret_rhs, fit_sq_rhs)
}

/// Least-squares slope of log(metric) against log(T).
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub used: usize,
    pub warnings: Vec<String>,
}

pub fn slope_estimate(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::Estimation(format!(
            "slope estimation needs at least 4 horizon points, got {}",
            points.len()
        )));
    }
    let mut warnings = Vec::new();
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(t, v)| {
            if v > 0.0 && t > 0.0 {
                true
            } else {
                warnings.push(format!("excluded non-positive point (T={t}, metric={v})"));
                false
            }
        })
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::Estimation(format!(
            "fewer than 2 usable points after excluding non-positive metrics ({} left)",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Estimation("degenerate horizons in slope estimation".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok(SlopeFit {
        slope,
        intercept,
        used: usable.len(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::FeasibleSet;
    use crate::problems::Constants;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// n = 1 quadratic with one fixed affine constraint, for oracle tests:
    /// f(x) = ||x - target||^2, g(x) = x_0 - cut.
    struct Quad {
        set: FeasibleSet,
        target: Vec<f64>,
        cut: f64,
    }

    impl Problem for Quad {
        fn agents(&self) -> usize {
            1
        }
        fn dim(&self) -> usize {
            2
        }
        fn constraints(&self) -> usize {
            1
        }
        fn horizon(&self) -> usize {
            4
        }
        fn feasible_set(&self) -> &FeasibleSet {
            &self.set
        }
        fn constants(&self) -> Constants {
            Constants {
                f_bound: 4.0,
                grad_bound: 2.0 * std::f64::consts::SQRT_2,
                lipschitz: 2.0 * std::f64::consts::SQRT_2,
            }
        }
        fn smoothness(&self) -> f64 {
            2.0
        }
        fn objective(&self, _i: usize, t: usize, x: &[f64]) -> f64 {
            if t == 0 {
                return 0.0;
            }
            x.iter()
                .zip(&self.target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        }
        fn objective_grad(&self, _i: usize, t: usize, x: &[f64], out: &mut [f64]) {
            if t == 0 {
                out.fill(0.0);
                return;
            }
            for ((o, xi), ti) in out.iter_mut().zip(x).zip(&self.target) {
                *o = 2.0 * (xi - ti);
            }
        }
        fn constraint(&self, _i: usize, t: usize, x: &[f64], out: &mut [f64]) {
            out[0] = if t == 0 { 0.0 } else { x[0] - self.cut };
        }
        fn constraint_jac(&self, _i: usize, t: usize, _x: &[f64], out: &mut [f64]) {
            out.fill(0.0);
            if t > 0 {
                out[0] = 1.0;
            }
        }
    }

    fn quad(cut: f64) -> Quad {
        Quad {
            set: FeasibleSet::Box {
                lo: vec![0.0, 0.0],
                hi: vec![1.0, 1.0],
            },
            target: vec![1.0, 1.0],
            cut,
        }
    }

    #[test]
    fn comparator_finds_active_constraint_solution() {
        // f = ||x - (1,1)||^2, g = x_0 - 0.5 on [0,1]^2: x* = (0.5, 1).
        let p = quad(0.5);
        let (x, diag) = comparator_oracle(&p, 1, 1e-7).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-6, "{x:?}");
        assert!((x[1] - 1.0).abs() < 1e-6, "{x:?}");
        assert!(diag.max_violation <= 1e-7);
    }

    #[test]
    fn comparator_with_inactive_constraint_hits_interior_minimum() {
        // Cut beyond the box: unconstrained minimizer (1,1) is feasible.
        let p = quad(2.0);
        let (x, _) = comparator_oracle(&p, 1, 1e-7).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn path_variation_hand_values() {
        assert_eq!(path_variation(&[vec![0.5, 0.5]]), 0.0);
        let p = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!((path_variation(&p) - 2.0).abs() < 1e-15);
        let constant = vec![vec![0.3, 0.3]; 5];
        assert_eq!(path_variation(&constant), 0.0);
    }

    #[test]
    fn slope_estimate_exact_power_laws() {
        let pts: Vec<(f64, f64)> = (8..=12).map(|k| {
            let t = (1u64 << k) as f64;
            (t, 3.0 * t)
        })
        .collect();
        let fit = slope_estimate(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);

        let pts: Vec<(f64, f64)> = (8..=12)
            .map(|k| {
                let t = (1u64 << k) as f64;
                (t, 0.5 * t.powf(2.0 / 3.0))
            })
            .collect();
        let fit = slope_estimate(&pts).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn slope_estimate_with_noise_recovers_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<(f64, f64)> = (8..=13)
            .map(|k| {
                let t = (1u64 << k) as f64;
                let noise = 1.0 + 0.01 * (2.0 * rng.gen::<f64>() - 1.0);
                (t, 2.0 * t.sqrt() * noise)
            })
            .collect();
        let fit = slope_estimate(&pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.05, "slope = {}", fit.slope);
    }

    #[test]
    fn slope_estimate_excludes_nonpositive_and_errors_when_starved() {
        let pts = vec![(256.0, 0.0), (512.0, -1.0), (1024.0, 2.0), (2048.0, 4.0)];
        let fit = slope_estimate(&pts).unwrap();
        assert_eq!(fit.used, 2);
        assert_eq!(fit.warnings.len(), 2);
        assert!((fit.slope - 1.0).abs() < 1e-9);

        let pts = vec![(256.0, 0.0), (512.0, 0.0), (1024.0, 0.0), (2048.0, 4.0)];
        assert!(slope_estimate(&pts).is_err());
        assert!(slope_estimate(&pts[..3]).is_err());
    }

    #[test]
    fn theorem_bound_exponents_and_degenerate_cases() {
        let schedule = Schedule::new(2.0 / 3.0, 1.0 / 3.0).unwrap();
        let c = BoundConstants::compute(1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 4, 0.5, &schedule);
        assert!((c.regret_exponent() - 2.0 / 3.0).abs() < 1e-12);
        let [e1, e2, e3] = c.fit_sq_exponents();
        assert!((e1 - 5.0 / 3.0).abs() < 1e-12);
        assert!((e2 - 4.0 / 3.0).abs() < 1e-12);
        assert!((e3 - 4.0 / 3.0).abs() < 1e-12);

        // T = 1: regret rhs reduces to R1 + 2 K C*.
        let (regret_rhs, _) = theorem_bounds(&c, 1, 0.7);
        assert!((regret_rhs - (c.r1 + 2.0 * c.bregman_lipschitz * 0.7)).abs() < 1e-12);

        // C* = 0 drops the comparator term.
        let (regret_rhs, _) = theorem_bounds(&c, 32, 0.0);
        assert!((regret_rhs - c.r1 * 32f64.powf(c.regret_exponent())).abs() < 1e-9);

        // sigma2 = 0 zeroes the network constant.
        let c0 = BoundConstants::compute(1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 4, 0.0, &schedule);
        assert_eq!(c0.r, 0.0);
        assert_eq!(c0.d3, 0.0);
    }

    #[test]
    fn b1_formula() {
        let schedule = Schedule::new(0.5, 0.25).unwrap();
        let c = BoundConstants::compute(2.0, 3.0, 1.0, 1.0, 1.0, 1.5, 2, 0.1, &schedule);
        assert!((c.b1 - (2.0 * 2.0 + 3.0 * 1.5)).abs() < 1e-15);
    }
}

//! Time-varying local objective/constraint generators with certified
//! regularity constants.
//!
//! Two suite kinds are provided. `tracking` uses quadratic distance losses
//! to per-agent moving targets; `regression` uses scalar least-squares
//! losses against a drifting parameter. Both pair the objective with one
//! affine "pressure" constraint row that stays mildly active at the
//! per-round optimum (so dual variables and long-term violations are
//! actually exercised) and, for m > 1, additional affine rows with enough
//! slack to never activate anywhere on the set.
//!
//! All coefficients derive from a single seed; evaluation is pure in
//! (agent, round, point), so concurrent access is race-free.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mirror::FeasibleSet;
use crate::rngs;
use crate::vecops;

/// Fraction of the set inradius used for the anchor orbit radius.
const ANCHOR_RADIUS_FRAC: f64 = 0.45;
/// Fraction of the set inradius bounding per-agent target offsets.
const OFFSET_RADIUS_FRAC: f64 = 0.25;
/// Pressure-row cut depth range, as fractions of the set inradius.
const DEPTH_FRAC_RANGE: (f64, f64) = (0.02, 0.06);
/// Extra slack (fraction of inradius) added beyond the set outradius for
/// never-active constraint rows.
const SLACK_MARGIN_FRAC: f64 = 0.2;

/// Uniform regularity constants of a problem sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constants {
    /// Uniform bound on |f| and ||g||.
    pub f_bound: f64,
    /// Uniform bound on ||grad f|| and the constraint Jacobian spectral norm.
    pub grad_bound: f64,
    /// Lipschitz constant of f and g on the set.
    pub lipschitz: f64,
}

/// A sequence of per-agent objectives and constraints over a feasible set.
///
/// Round index 0 denotes the identically-zero functions used to initialize
/// the online protocol; real rounds are `1..=horizon()`.
pub trait Problem: Sync {
    fn agents(&self) -> usize;
    fn dim(&self) -> usize;
    fn constraints(&self) -> usize;
    fn horizon(&self) -> usize;
    fn feasible_set(&self) -> &FeasibleSet;
    fn constants(&self) -> Constants;
    /// Upper bound on the objective Hessian spectral norm, used by the
    /// comparator solver to scale its steps.
    fn smoothness(&self) -> f64;

    fn objective(&self, agent: usize, t: usize, x: &[f64]) -> f64;
    fn objective_grad(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]);
    fn constraint(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]);
    /// Row-major `m x d` Jacobian.
    fn constraint_jac(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]);
}

/// Network-average objective `f_t(x) = (1/n) sum_i f_{i,t}(x)`.
pub fn global_objective(p: &(impl Problem + ?Sized), t: usize, x: &[f64]) -> f64 {
    let n = p.agents();
    (0..n).map(|i| p.objective(i, t, x)).sum::<f64>() / n as f64
}

/// Gradient of the network-average objective.
pub fn global_objective_grad(p: &(impl Problem + ?Sized), t: usize, x: &[f64]) -> Vec<f64> {
    let n = p.agents();
    let d = p.dim();
    let mut out = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for i in 0..n {
        p.objective_grad(i, t, x, &mut buf);
        vecops::axpy(&mut out, 1.0 / n as f64, &buf);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Tracking,
    Regression,
}

/// Generation parameters for a built-in suite.
#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub kind: SuiteKind,
    pub agents: usize,
    pub dim: usize,
    pub constraints: usize,
    pub horizon: usize,
    /// Drift decay exponent rho: per-step target displacement is
    /// `drift_delta / t^rho`. Allowed values: 0, 0.5, 1.
    pub drift_rho: f64,
    pub drift_delta: f64,
    pub seed: u64,
}

impl SuiteParams {
    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::Config("problem.n must be positive".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("problem.d must be positive".into()));
        }
        if self.constraints == 0 {
            return Err(Error::Config("problem.m must be positive".into()));
        }
        if ![0.0, 0.5, 1.0].contains(&self.drift_rho) {
            return Err(Error::Config(format!(
                "problem.drift_rho must be one of 0, 0.5, 1 (got {})",
                self.drift_rho
            )));
        }
        if !(self.drift_delta >= 0.0) {
            return Err(Error::Config("problem.drift_delta must be non-negative".into()));
        }
        Ok(())
    }
}

/// Built-in problem suite (both kinds share the same constraint geometry).
#[derive(Debug, Clone)]
pub struct Suite {
    params: SuiteParams,
    set: FeasibleSet,
    /// Anchor point per round, index `t - 1`, length `horizon`.
    anchor: Vec<Vec<f64>>,
    /// Per-agent target offsets (mean-centered, tracking only).
    offsets: Vec<Vec<f64>>,
    /// Per-agent unit feature directions (regression only).
    features: Vec<Vec<f64>>,
    /// Per-agent row-major `m x d` constraint matrices.
    rows: Vec<Vec<f64>>,
    /// Per-agent pressure-row cut depth.
    depth: Vec<f64>,
    /// Per-agent slack-row offsets `b` (rows 1..m), constant over rounds.
    slack_levels: Vec<Vec<f64>>,
    constants: Constants,
    smoothness: f64,
}

impl Suite {
    pub fn generate(params: SuiteParams, set: FeasibleSet) -> Result<Self> {
        params.validate()?;
        set.validate()?;
        if set.dim() != params.dim {
            return Err(Error::Config(format!(
                "problem.d = {} does not match feasible_set dimension {}",
                params.dim,
                set.dim()
            )));
        }

        let n = params.agents;
        let d = params.dim;
        let m = params.constraints;
        let r_in = set.inradius();
        let center = set.center();
        let in_hull = |v: &mut Vec<f64>| {
            // Directions for simplex sets must stay in the affine hull.
            if matches!(set, FeasibleSet::Simplex { .. }) {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                for x in v.iter_mut() {
                    *x -= mean;
                }
            }
        };
        let unit = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            loop {
                let mut v: Vec<f64> = (0..d).map(|_| rngs::gaussian(rng)).collect();
                in_hull(&mut v);
                let norm = vecops::norm(&v);
                if norm > 1e-9 {
                    return vecops::scale(&v, 1.0 / norm);
                }
            }
        };

        // Anchor orbit: coherent circular drift with per-step arc length
        // delta / t^rho, so the comparator path variation is controlled by
        // (delta, rho) alone.
        let mut rng = rngs::substream(params.seed, "problem.anchor");
        let r_w = ANCHOR_RADIUS_FRAC * r_in;
        let e1 = unit(&mut rng);
        let mut e2 = unit(&mut rng);
        // Gram-Schmidt; degenerate when the hull is one-dimensional.
        let proj = vecops::dot(&e2, &e1);
        vecops::axpy(&mut e2, -proj, &e1);
        let e2_norm = vecops::norm(&e2);
        if e2_norm > 1e-9 {
            e2 = vecops::scale(&e2, 1.0 / e2_norm);
        } else {
            e2 = vec![0.0; d];
        }
        let mut theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut anchor = Vec::with_capacity(params.horizon);
        for t in 1..=params.horizon {
            let mut s = center.clone();
            vecops::axpy(&mut s, r_w * theta.cos(), &e1);
            vecops::axpy(&mut s, r_w * theta.sin(), &e2);
            anchor.push(s);
            let step = params.drift_delta / (t as f64).powf(params.drift_rho);
            theta += (step / r_w).min(std::f64::consts::FRAC_PI_4);
        }

        // Mean-centered per-agent offsets, bounded by the offset radius.
        let mut rng = rngs::substream(params.seed, "problem.offsets");
        let r_u = OFFSET_RADIUS_FRAC * r_in;
        let mut offsets: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let u = unit(&mut rng);
                vecops::scale(&u, r_u * rng.gen_range(0.5..1.0))
            })
            .collect();
        let mean: Vec<f64> = (0..d)
            .map(|k| offsets.iter().map(|u| u[k]).sum::<f64>() / n as f64)
            .collect();
        for u in offsets.iter_mut() {
            for (uk, mk) in u.iter_mut().zip(&mean) {
                *uk -= mk;
            }
        }
        let max_norm = offsets.iter().map(|u| vecops::norm(u)).fold(0.0, f64::max);
        if max_norm > r_u {
            let s = r_u / max_norm;
            for u in offsets.iter_mut() {
                for uk in u.iter_mut() {
                    *uk *= s;
                }
            }
        }

        let mut rng = rngs::substream(params.seed, "problem.features");
        let features: Vec<Vec<f64>> = (0..n).map(|_| unit(&mut rng)).collect();

        // Constraint geometry: shared pressure direction with small per-agent
        // perturbations, plus never-active slack rows.
        let mut rng = rngs::substream(params.seed, "problem.constraints");
        let p0 = unit(&mut rng);
        let mut rows = Vec::with_capacity(n);
        let mut depth = Vec::with_capacity(n);
        let mut slack_levels = Vec::with_capacity(n);
        let slack_level_base = set.outradius() + SLACK_MARGIN_FRAC * r_in;
        for _ in 0..n {
            let mut a = Vec::with_capacity(m * d);
            let mut perturbed: Vec<f64> = p0.clone();
            let noise = unit(&mut rng);
            vecops::axpy(&mut perturbed, 0.1, &noise);
            in_hull(&mut perturbed);
            let p_i = vecops::scale(&perturbed, 1.0 / vecops::norm(&perturbed));
            a.extend_from_slice(&p_i);
            let mut levels = Vec::with_capacity(m.saturating_sub(1));
            for _ in 1..m {
                let r = unit(&mut rng);
                levels.push(vecops::dot(&r, &center) + slack_level_base);
                a.extend_from_slice(&r);
            }
            rows.push(a);
            depth.push(r_in * rng.gen_range(DEPTH_FRAC_RANGE.0..DEPTH_FRAC_RANGE.1));
            slack_levels.push(levels);
        }

        let (constants, smoothness) =
            derive_constants(&params, &set, &rows, &depth, &slack_levels, r_w);

        Ok(Suite {
            params,
            set,
            anchor,
            offsets,
            features,
            rows,
            depth,
            slack_levels,
            constants,
            smoothness,
        })
    }

    pub fn params(&self) -> &SuiteParams {
        &self.params
    }

    /// A point strictly feasible for every agent's constraints at every
    /// round (guarantees the per-round comparator problem is solvable).
    pub fn strictly_feasible_point(&self) -> Vec<f64> {
        // Walk from the center against the shared pressure direction; the
        // slack rows cannot activate inside the inradius ball.
        let center = self.set.center();
        let mut p_mean = vec![0.0; self.params.dim];
        for rows in &self.rows {
            vecops::axpy(&mut p_mean, 1.0, &rows[..self.params.dim]);
        }
        let norm = vecops::norm(&p_mean).max(1e-12);
        let mut pt = center;
        vecops::axpy(&mut pt, -0.9 * self.set.inradius() / norm, &p_mean);
        pt
    }

    fn target(&self, agent: usize, t: usize) -> Vec<f64> {
        let mut c = self.anchor[t - 1].clone();
        vecops::axpy(&mut c, 1.0, &self.offsets[agent]);
        c
    }

    fn check_index(&self, agent: usize, t: usize) {
        assert!(
            agent < self.params.agents,
            "agent index {agent} out of range (n = {})",
            self.params.agents
        );
        assert!(
            t <= self.params.horizon,
            "round index {t} out of range (horizon = {})",
            self.params.horizon
        );
    }
}

impl Problem for Suite {
    fn agents(&self) -> usize {
        self.params.agents
    }

    fn dim(&self) -> usize {
        self.params.dim
    }

    fn constraints(&self) -> usize {
        self.params.constraints
    }

    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn constants(&self) -> Constants {
        self.constants
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn objective(&self, agent: usize, t: usize, x: &[f64]) -> f64 {
        self.check_index(agent, t);
        if t == 0 {
            return 0.0;
        }
        match self.params.kind {
            SuiteKind::Tracking => {
                let c = self.target(agent, t);
                0.5 * x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            SuiteKind::Regression => {
                let h = &self.features[agent];
                let z = vecops::dot(h, &self.anchor[t - 1]);
                let r = vecops::dot(h, x) - z;
                0.5 * r * r
            }
        }
    }

    fn objective_grad(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]) {
        self.check_index(agent, t);
        assert_eq!(out.len(), self.params.dim);
        if t == 0 {
            out.fill(0.0);
            return;
        }
        match self.params.kind {
            SuiteKind::Tracking => {
                let c = self.target(agent, t);
                for ((o, xi), ci) in out.iter_mut().zip(x).zip(&c) {
                    *o = xi - ci;
                }
            }
            SuiteKind::Regression => {
                let h = &self.features[agent];
                let z = vecops::dot(h, &self.anchor[t - 1]);
                let r = vecops::dot(h, x) - z;
                for (o, hi) in out.iter_mut().zip(h) {
                    *o = r * hi;
                }
            }
        }
    }

    fn constraint(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]) {
        self.check_index(agent, t);
        assert_eq!(out.len(), self.params.constraints);
        if t == 0 {
            out.fill(0.0);
            return;
        }
        let d = self.params.dim;
        let rows = &self.rows[agent];
        // Pressure row is pinned a fixed depth past the round's anchor.
        let p = &rows[..d];
        out[0] = vecops::dot(p, x) - (vecops::dot(p, &self.anchor[t - 1]) - self.depth[agent]);
        for k in 1..self.params.constraints {
            let row = &rows[k * d..(k + 1) * d];
            out[k] = vecops::dot(row, x) - self.slack_levels[agent][k - 1];
        }
    }

    fn constraint_jac(&self, agent: usize, t: usize, x: &[f64], out: &mut [f64]) {
        self.check_index(agent, t);
        let _ = x;
        assert_eq!(out.len(), self.params.constraints * self.params.dim);
        if t == 0 {
            out.fill(0.0);
            return;
        }
        out.copy_from_slice(&self.rows[agent]);
    }
}

fn derive_constants(
    params: &SuiteParams,
    set: &FeasibleSet,
    rows: &[Vec<f64>],
    depth: &[f64],
    slack_levels: &[Vec<f64>],
    anchor_radius: f64,
) -> (Constants, f64) {
    let d = params.dim;
    let m = params.constraints;
    let diameter = set.diameter();

    // Objective: both kinds satisfy |f| <= d(X)^2 / 2 and ||grad f|| <= d(X)
    // because targets and anchors stay inside the set.
    let f_obj = 0.5 * diameter * diameter;
    let g_obj = diameter;

    let mut f_cons: f64 = 0.0;
    let mut sigma_max: f64 = 0.0;
    for (agent, a) in rows.iter().enumerate() {
        let mut row_sq_sum = 0.0;
        for k in 0..m {
            let row = &a[k * d..(k + 1) * d];
            let sup = if k == 0 {
                // |<p, x - s_t>| + depth over x in X, anchors on the orbit.
                affine_sup(set, row) + anchor_radius * vecops::norm(row) + depth[agent]
            } else {
                affine_sup(set, row)
                    + (slack_levels[agent][k - 1] - vecops::dot(row, &set.center())).abs()
            };
            row_sq_sum += sup * sup;
        }
        f_cons = f_cons.max(row_sq_sum.sqrt());
        let mat = DMatrix::from_row_slice(m, d, a);
        let spectral = mat.svd(false, false).singular_values[0];
        sigma_max = sigma_max.max(spectral);
    }

    let constants = Constants {
        f_bound: f_obj.max(f_cons),
        grad_bound: g_obj.max(sigma_max),
        lipschitz: g_obj.max(sigma_max),
    };
    // Tracking Hessian is the identity; regression Hessians are h h^T with
    // unit feature vectors.
    (constants, 1.0)
}

/// sup over the set of |<v, x - center>| (exact per kind).
fn affine_sup(set: &FeasibleSet, v: &[f64]) -> f64 {
    match set {
        FeasibleSet::Box { lo, hi } => v
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(vk, (l, h))| vk.abs() * 0.5 * (h - l))
            .sum(),
        FeasibleSet::Ball { radius, .. } => radius * vecops::norm(v),
        FeasibleSet::Simplex { dim } => {
            let mean = v.iter().sum::<f64>() / *dim as f64;
            v.iter().map(|vk| (vk - mean).abs()).fold(0.0, f64::max)
        }
    }
}

/// Result of auditing declared constants against sampled evaluations.
#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub declared: Constants,
    pub empirical: Constants,
    pub passed: bool,
}

/// Audit declared (F, G, L) against `samples` random (agent, round, point)
/// draws. Failure is reported, not thrown.
pub fn certify_constants(p: &(impl Problem + ?Sized), samples: usize) -> Result<Certification> {
    if samples == 0 {
        return Err(Error::Domain("certify_constants requires samples >= 1".into()));
    }
    let mut rng = rngs::substream(0xC0117AB1E, "certify");
    let set = p.feasible_set();
    let n = p.agents();
    let d = p.dim();
    let m = p.constraints();
    let t_max = p.horizon();
    let mut emp_f: f64 = 0.0;
    let mut emp_g: f64 = 0.0;
    let mut emp_l: f64 = 0.0;
    let mut g_buf = vec![0.0; m];
    let mut grad_buf = vec![0.0; d];
    let mut jac_buf = vec![0.0; m * d];
    for _ in 0..samples {
        let i = rng.gen_range(0..n);
        let t = rng.gen_range(0..=t_max);
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);

        let fx = p.objective(i, t, &x);
        emp_f = emp_f.max(fx.abs());
        p.constraint(i, t, &x, &mut g_buf);
        emp_f = emp_f.max(vecops::norm(&g_buf));

        p.objective_grad(i, t, &x, &mut grad_buf);
        emp_g = emp_g.max(vecops::norm(&grad_buf));
        p.constraint_jac(i, t, &x, &mut jac_buf);
        let spectral = DMatrix::from_row_slice(m, d, &jac_buf)
            .svd(false, false)
            .singular_values[0];
        emp_g = emp_g.max(spectral);

        let dist = vecops::dist(&x, &y);
        if dist > 1e-9 {
            let fy = p.objective(i, t, &y);
            emp_l = emp_l.max((fx - fy).abs() / dist);
            let mut gy = vec![0.0; m];
            p.constraint(i, t, &y, &mut gy);
            let gdiff: f64 = g_buf
                .iter()
                .zip(&gy)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            emp_l = emp_l.max(gdiff / dist);
        }
    }
    let declared = p.constants();
    let slack = 1e-9;
    let passed = declared.f_bound + slack >= emp_f
        && declared.grad_bound + slack >= emp_g
        && declared.lipschitz + slack >= emp_l;
    Ok(Certification {
        declared,
        empirical: Constants {
            f_bound: emp_f,
            grad_bound: emp_g,
            lipschitz: emp_l,
        },
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(d: usize) -> FeasibleSet {
        FeasibleSet::Box {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    fn tracking_params(seed: u64) -> SuiteParams {
        SuiteParams {
            kind: SuiteKind::Tracking,
            agents: 4,
            dim: 2,
            constraints: 2,
            horizon: 64,
            drift_rho: 1.0,
            drift_delta: 0.25,
            seed,
        }
    }

    #[test]
    fn round_zero_is_identically_zero() {
        let suite = Suite::generate(tracking_params(1), unit_box(2)).unwrap();
        let x = [0.3, 0.9];
        assert_eq!(suite.objective(0, 0, &x), 0.0);
        let mut grad = [1.0; 2];
        suite.objective_grad(0, 0, &x, &mut grad);
        assert_eq!(grad, [0.0, 0.0]);
        let mut g = [1.0; 2];
        suite.constraint(0, 0, &x, &mut g);
        assert_eq!(g, [0.0, 0.0]);
        let mut jac = [1.0; 4];
        suite.constraint_jac(0, 0, &x, &mut jac);
        assert_eq!(jac, [0.0; 4]);
    }

    #[test]
    fn tracking_quadratic_closed_form() {
        let suite = Suite::generate(tracking_params(2), unit_box(2)).unwrap();
        let c = suite.target(1, 5);
        // At the target: zero value, zero gradient.
        assert!(suite.objective(1, 5, &c).abs() < 1e-15);
        let mut grad = [0.0; 2];
        suite.objective_grad(1, 5, &c, &mut grad);
        assert!(vecops::norm(&grad) < 1e-15);
        // Shifted by (0.1, 0): value 0.005, gradient (0.1, 0).
        let x = [c[0] + 0.1, c[1]];
        assert!((suite.objective(1, 5, &x) - 0.005).abs() < 1e-12);
        suite.objective_grad(1, 5, &x, &mut grad);
        assert!((grad[0] - 0.1).abs() < 1e-12 && grad[1].abs() < 1e-12);
    }

    #[test]
    fn constraint_is_affine_with_matching_jacobian() {
        let suite = Suite::generate(tracking_params(3), unit_box(2)).unwrap();
        let x = [0.8, 0.1];
        let y = [0.2, 0.6];
        let mut gx = [0.0; 2];
        let mut gy = [0.0; 2];
        let mut jac = [0.0; 4];
        suite.constraint(2, 7, &x, &mut gx);
        suite.constraint(2, 7, &y, &mut gy);
        suite.constraint_jac(2, 7, &x, &mut jac);
        let diff = vecops::sub(&x, &y);
        let jd = vecops::matvec(&jac, 2, 2, &diff);
        for k in 0..2 {
            assert!((gx[k] - gy[k] - jd[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = Suite::generate(tracking_params(9), unit_box(2)).unwrap();
        let b = Suite::generate(tracking_params(9), unit_box(2)).unwrap();
        let x = [0.4, 0.7];
        for t in [1usize, 17, 64] {
            for i in 0..4 {
                assert_eq!(a.objective(i, t, &x), b.objective(i, t, &x));
                let mut ga = [0.0; 2];
                let mut gb = [0.0; 2];
                a.constraint(i, t, &x, &mut ga);
                b.constraint(i, t, &x, &mut gb);
                assert_eq!(ga, gb);
            }
        }
    }

    #[test]
    fn strictly_feasible_point_satisfies_all_rounds() {
        for kind in [SuiteKind::Tracking, SuiteKind::Regression] {
            let mut params = tracking_params(11);
            params.kind = kind;
            let suite = Suite::generate(params, unit_box(2)).unwrap();
            let pt = suite.strictly_feasible_point();
            assert!(suite.feasible_set().contains(&pt, 1e-12));
            let mut g = [0.0; 2];
            for t in 1..=suite.horizon() {
                for i in 0..suite.agents() {
                    suite.constraint(i, t, &pt, &mut g);
                    assert!(
                        g.iter().all(|&v| v < 0.0),
                        "violated at t={t}, i={i}: {g:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn anchor_drift_bounded_by_schedule() {
        for rho in [0.0, 0.5, 1.0] {
            let mut params = tracking_params(13);
            params.drift_rho = rho;
            let suite = Suite::generate(params, unit_box(2)).unwrap();
            for t in 1..suite.anchor.len() {
                let step = vecops::dist(&suite.anchor[t], &suite.anchor[t - 1]);
                let budget = params.drift_delta / (t as f64).powf(rho);
                assert!(step <= budget + 1e-12, "rho={rho}, t={t}: {step} > {budget}");
            }
        }
    }

    #[test]
    fn targets_stay_inside_the_set() {
        let suite = Suite::generate(tracking_params(17), unit_box(2)).unwrap();
        for t in 1..=suite.horizon() {
            for i in 0..suite.agents() {
                let c = suite.target(i, t);
                assert!(suite.feasible_set().contains(&c, 1e-12));
            }
        }
    }

    #[test]
    fn certify_constants_passes_for_generated_suites() {
        for kind in [SuiteKind::Tracking, SuiteKind::Regression] {
            let mut params = tracking_params(23);
            params.kind = kind;
            let suite = Suite::generate(params, unit_box(2)).unwrap();
            let cert = certify_constants(&suite, 500).unwrap();
            assert!(cert.passed, "{cert:?}");
            // Tracking on the unit box: the empirical objective bound cannot
            // exceed d(X)^2 / 2 = 1.
            assert!(cert.empirical.f_bound <= cert.declared.f_bound);
        }
    }

    #[test]
    fn certify_rejects_zero_samples() {
        let suite = Suite::generate(tracking_params(29), unit_box(2)).unwrap();
        assert!(certify_constants(&suite, 0).is_err());
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn objective_rejects_bad_round() {
        let suite = Suite::generate(tracking_params(31), unit_box(2)).unwrap();
        suite.objective(0, 65, &[0.5, 0.5]);
    }

    #[test]
    fn simplex_suite_respects_affine_hull() {
        let params = SuiteParams {
            kind: SuiteKind::Tracking,
            agents: 3,
            dim: 3,
            constraints: 2,
            horizon: 32,
            drift_rho: 1.0,
            drift_delta: 0.1,
            seed: 5,
        };
        let suite = Suite::generate(params, FeasibleSet::Simplex { dim: 3 }).unwrap();
        for t in 1..=32 {
            for i in 0..3 {
                let c = suite.target(i, t);
                assert!(
                    suite.feasible_set().contains(&c, 1e-9),
                    "target off simplex at t={t}: {c:?}"
                );
            }
        }
    }
}

//! Bregman divergence machinery: mirror maps, the regularized Bregman
//! projection, and Euclidean/orthant projections.
//!
//! Two generating functions are supported: the Euclidean half squared norm
//! and negative entropy on the probability simplex. Every supported
//! (map, set) pair admits a closed-form regularized projection, so the
//! primal argmin is exact rather than the output of an inner solver.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops;

/// Interior floor for entropy-map iterates on the simplex. Gradients of the
/// entropy map blow up at the boundary, so iterates are kept in the clipped
/// simplex `{x : x_k >= ENTROPY_EPS / (1 + d * ENTROPY_EPS)}`.
pub const ENTROPY_EPS: f64 = 1e-6;

/// Convex compact feasible set with closed-form projection and diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeasibleSet {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { dim: usize },
}

impl FeasibleSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::Config(
                        "feasible_set.lo and feasible_set.hi must be nonempty and equal-length".into(),
                    ));
                }
                if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                    return Err(Error::Config(
                        "feasible_set requires lo < hi per coordinate".into(),
                    ));
                }
            }
            FeasibleSet::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(Error::Config("feasible_set.center must be nonempty".into()));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Config("feasible_set.radius must be positive".into()));
                }
            }
            FeasibleSet::Simplex { dim } => {
                if *dim < 2 {
                    return Err(Error::Config("feasible_set.dim must be at least 2".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lo, .. } => lo.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Simplex { dim } => *dim,
        }
    }

    /// Exact diameter `sup ||x - y||` per kind.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => vecops::dist(hi, lo),
            FeasibleSet::Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Simplex { .. } => std::f64::consts::SQRT_2,
        }
    }

    /// Canonical center: box midpoint, ball center, uniform simplex point.
    pub fn center(&self) -> Vec<f64> {
        match self {
            FeasibleSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
        }
    }

    /// sup over the set of the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            FeasibleSet::Ball { center, radius } => vecops::norm(center) + radius,
            FeasibleSet::Simplex { .. } => 1.0,
        }
    }

    /// Radius of the largest ball around `center()` contained in the set
    /// (for the simplex: within its affine hull).
    pub fn inradius(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| 0.5 * (h - l))
                .fold(f64::INFINITY, f64::min),
            FeasibleSet::Ball { radius, .. } => *radius,
            FeasibleSet::Simplex { dim } => {
                let d = *dim as f64;
                1.0 / (d * (d - 1.0)).sqrt()
            }
        }
    }

    /// Max distance from `center()` to a point of the set.
    pub fn outradius(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (0.5 * (h - l)).powi(2))
                .sum::<f64>()
                .sqrt(),
            FeasibleSet::Ball { radius, .. } => *radius,
            FeasibleSet::Simplex { dim } => {
                let d = *dim as f64;
                ((d - 1.0) / d).sqrt()
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            FeasibleSet::Ball { center, radius } => vecops::dist(x, center) <= radius + tol,
            FeasibleSet::Simplex { .. } => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Euclidean projection `argmin_{x in set} ||x - y||^2`.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim(), "project: dimension mismatch");
        match self {
            FeasibleSet::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let diff = vecops::sub(y, center);
                let dist = vecops::norm(&diff);
                if dist <= *radius {
                    y.to_vec()
                } else {
                    let s = radius / dist;
                    center.iter().zip(&diff).map(|(c, d)| c + s * d).collect()
                }
            }
            FeasibleSet::Simplex { .. } => project_simplex(y),
        }
    }

    /// Uniform-ish sample used by property tests and constant certification.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| rng.gen_range(*l..*h))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                // Gaussian direction, radius scaled for uniform volume.
                let d = center.len();
                let mut dir: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
                let n = vecops::norm(&dir).max(1e-300);
                let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                for v in dir.iter_mut() {
                    *v *= r / n;
                }
                center.iter().zip(&dir).map(|(c, v)| c + v).collect()
            }
            FeasibleSet::Simplex { dim } => {
                // Normalized exponentials are uniform on the simplex.
                let e: Vec<f64> = (0..*dim).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            }
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; tails are irrelevant for sampling directions.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Sorted-threshold Euclidean projection onto the probability simplex.
fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    // k = 0 always satisfies v - candidate = 1 > 0, so theta is always set.
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Coordinate-wise projection onto the non-negative orthant.
pub fn nonneg_project(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorKind {
    Euclidean,
    NegativeEntropy,
}

/// Mirror map paired with a feasible set.
///
/// `mu` is the strong-convexity modulus w.r.t. the Euclidean norm and
/// `k_bound` the Bregman Lipschitz constant on the paired set (clipped
/// simplex for the entropy map, since the entropy gradient is unbounded at
/// the boundary).
#[derive(Debug, Clone)]
pub struct MirrorMap {
    kind: MirrorKind,
    dim: usize,
    mu: f64,
    k_bound: f64,
}

impl MirrorMap {
    pub fn new(kind: MirrorKind, set: &FeasibleSet) -> Result<Self> {
        set.validate()?;
        let dim = set.dim();
        match (kind, set) {
            (MirrorKind::Euclidean, _) => Ok(MirrorMap {
                kind,
                dim,
                mu: 1.0,
                // grad_x D(x, y) = x - y, so diameter alone suffices; the
                // sup-norm term keeps the declared constant conservative.
                k_bound: set.diameter() + set.sup_norm(),
            }),
            (MirrorKind::NegativeEntropy, FeasibleSet::Simplex { .. }) => Ok(MirrorMap {
                kind,
                dim,
                mu: 1.0,
                // |ln(x_k / y_k)| <= ln(2 / eps) on the clipped simplex.
                k_bound: (dim as f64).sqrt() * (2.0 / ENTROPY_EPS).ln(),
            }),
            (MirrorKind::NegativeEntropy, _) => Err(Error::Config(
                "mirror negative_entropy is only supported with feasible_set.kind = simplex".into(),
            )),
        }
    }

    pub fn kind(&self) -> MirrorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Strong-convexity modulus w.r.t. the Euclidean norm.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Bregman Lipschitz constant on the paired feasible set.
    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            MirrorKind::Euclidean => 0.5 * vecops::norm_sq(x),
            MirrorKind::NegativeEntropy => x
                .iter()
                .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
                .sum(),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            MirrorKind::Euclidean => Ok(x.to_vec()),
            MirrorKind::NegativeEntropy => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy gradient requires strictly positive coordinates".into(),
                    ));
                }
                Ok(x.iter().map(|&v| 1.0 + v.ln()).collect())
            }
        }
    }

    /// Bregman divergence `R(x) - R(y) - <x - y, grad R(y)>`, evaluated via
    /// the cancellation-free closed form of each map.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::Dimension("bregman: dimension mismatch".into()));
        }
        match self.kind {
            MirrorKind::Euclidean => {
                Ok(0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
            MirrorKind::NegativeEntropy => {
                if y.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy Bregman divergence requires strictly positive y".into(),
                    ));
                }
                if x.iter().any(|&v| v < 0.0) {
                    return Err(Error::Domain(
                        "entropy Bregman divergence requires non-negative x".into(),
                    ));
                }
                // sum x ln(x/y) - x + y, with 0 ln 0 = 0.
                Ok(x.iter()
                    .zip(y)
                    .map(|(&a, &b)| {
                        let t = if a > 0.0 { a * (a / b).ln() } else { 0.0 };
                        t - a + b
                    })
                    .sum())
            }
        }
    }

    /// Regularized Bregman projection
    /// `argmin_{x in set} alpha * <x, a> + D_R(x, z)`.
    pub fn regularized_projection(
        &self,
        set: &FeasibleSet,
        z: &[f64],
        a: &[f64],
        alpha: f64,
    ) -> Result<Vec<f64>> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!(
                "regularized projection requires alpha > 0, got {alpha}"
            )));
        }
        if z.len() != self.dim || a.len() != self.dim || set.dim() != self.dim {
            return Err(Error::Dimension("regularized projection: dimension mismatch".into()));
        }
        match self.kind {
            MirrorKind::Euclidean => {
                // argmin alpha<x,a> + 0.5||x - z||^2 = P_X(z - alpha a)
                let shifted: Vec<f64> = z.iter().zip(a).map(|(zi, ai)| zi - alpha * ai).collect();
                Ok(set.project(&shifted))
            }
            MirrorKind::NegativeEntropy => {
                if !matches!(set, FeasibleSet::Simplex { .. }) {
                    return Err(Error::Config(
                        "entropy regularized projection requires the simplex".into(),
                    ));
                }
                if z.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy regularized projection requires strictly positive z".into(),
                    ));
                }
                // Multiplicative weights: x_k proportional to z_k exp(-alpha a_k).
                // Shift exponents by the max to avoid underflow of the whole vector.
                let m = a
                    .iter()
                    .map(|ai| -alpha * ai)
                    .fold(f64::NEG_INFINITY, f64::max);
                let unnorm: Vec<f64> = z
                    .iter()
                    .zip(a)
                    .map(|(zi, ai)| zi * (-alpha * ai - m).exp())
                    .collect();
                let s: f64 = unnorm.iter().sum();
                Ok(unnorm.into_iter().map(|v| v / s).collect())
            }
        }
    }

    /// Keep an iterate strictly inside the map's admissible domain. For the
    /// entropy map this floors simplex coordinates at `ENTROPY_EPS` and
    /// renormalizes; the Euclidean map needs no clipping.
    pub fn clamp_interior(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            MirrorKind::Euclidean => x.to_vec(),
            MirrorKind::NegativeEntropy => {
                let floored: Vec<f64> = x.iter().map(|&v| v.max(ENTROPY_EPS)).collect();
                let s: f64 = floored.iter().sum();
                floored.into_iter().map(|v| v / s).collect()
            }
        }
    }

    /// Sample from the paired feasible set used to validate `k_bound`
    /// (clipped simplex for the entropy map).
    pub fn sample_paired(&self, set: &FeasibleSet, rng: &mut impl Rng) -> Vec<f64> {
        let x = set.sample(rng);
        match self.kind {
            MirrorKind::Euclidean => x,
            MirrorKind::NegativeEntropy => self.clamp_interior(&x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_box(d: usize) -> FeasibleSet {
        FeasibleSet::Box {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    #[test]
    fn diameters() {
        assert!((unit_box(2).diameter() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let ball = FeasibleSet::Ball {
            center: vec![0.0, 0.0],
            radius: 1.5,
        };
        assert_eq!(ball.diameter(), 3.0);
        assert!((FeasibleSet::Simplex { dim: 4 }.diameter() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn bregman_zero_at_equal_points() {
        let set = unit_box(2);
        let eu = MirrorMap::new(MirrorKind::Euclidean, &set).unwrap();
        assert_eq!(eu.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);

        let simplex = FeasibleSet::Simplex { dim: 2 };
        let ne = MirrorMap::new(MirrorKind::NegativeEntropy, &simplex).unwrap();
        assert_eq!(ne.bregman(&[0.4, 0.6], &[0.4, 0.6]).unwrap(), 0.0);
    }

    #[test]
    fn bregman_euclidean_closed_form() {
        let eu = MirrorMap::new(MirrorKind::Euclidean, &unit_box(2)).unwrap();
        let d = eu.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bregman_entropy_is_kl() {
        let simplex = FeasibleSet::Simplex { dim: 2 };
        let ne = MirrorMap::new(MirrorKind::NegativeEntropy, &simplex).unwrap();
        let d = ne.bregman(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let expected = 0.5 * (2.0f64).ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
    }

    #[test]
    fn bregman_entropy_rejects_boundary_y() {
        let simplex = FeasibleSet::Simplex { dim: 2 };
        let ne = MirrorMap::new(MirrorKind::NegativeEntropy, &simplex).unwrap();
        assert!(ne.bregman(&[0.5, 0.5], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn regularized_projection_zero_direction_returns_z() {
        let set = unit_box(2);
        let eu = MirrorMap::new(MirrorKind::Euclidean, &set).unwrap();
        let z = [0.25, 0.75];
        let y = eu.regularized_projection(&set, &z, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(y, z.to_vec());
    }

    #[test]
    fn regularized_projection_euclidean_box_clips() {
        let set = unit_box(2);
        let eu = MirrorMap::new(MirrorKind::Euclidean, &set).unwrap();
        let y = eu
            .regularized_projection(&set, &[0.5, 0.5], &[1.0, 0.0], 1.0)
            .unwrap();
        assert!((y[0] - 0.0).abs() < 1e-15);
        assert!((y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regularized_projection_entropy_multiplicative_weights() {
        let simplex = FeasibleSet::Simplex { dim: 2 };
        let ne = MirrorMap::new(MirrorKind::NegativeEntropy, &simplex).unwrap();
        let y = ne
            .regularized_projection(&simplex, &[0.5, 0.5], &[(2.0f64).ln(), 0.0], 1.0)
            .unwrap();
        assert!((y[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((y[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn regularized_projection_rejects_bad_alpha_and_pair() {
        let set = unit_box(2);
        let eu = MirrorMap::new(MirrorKind::Euclidean, &set).unwrap();
        assert!(eu.regularized_projection(&set, &[0.5, 0.5], &[1.0, 0.0], 0.0).is_err());
        assert!(MirrorMap::new(MirrorKind::NegativeEntropy, &set).is_err());
    }

    #[test]
    fn project_examples() {
        let b = unit_box(2);
        assert_eq!(b.project(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(b.project(&[2.0, -1.0]), vec![1.0, 0.0]);

        let ball = FeasibleSet::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let p = ball.project(&[3.0, 4.0]);
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert!((p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn project_simplex_properties() {
        let s = FeasibleSet::Simplex { dim: 3 };
        let p = s.project(&[0.2, 0.3, 0.5]);
        for (a, b) in p.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let q = s.project(&[2.0, 0.0, 0.0]);
        assert!((q[0] - 1.0).abs() < 1e-12 && q[1].abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s4 = FeasibleSet::Simplex { dim: 4 };
            let p = s4.project(&y);
            assert!(s4.contains(&p, 1e-9), "{p:?}");
            // Idempotence.
            let pp = s4.project(&p);
            assert!(vecops::dist(&p, &pp) < 1e-12);
        }
    }

    #[test]
    fn nonneg_project_examples() {
        assert_eq!(nonneg_project(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(nonneg_project(&[-1.0, 2.0]), vec![0.0, 2.0]);
        assert_eq!(nonneg_project(&[-3.0, -4.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn clamp_interior_keeps_simplex_sum() {
        let simplex = FeasibleSet::Simplex { dim: 3 };
        let ne = MirrorMap::new(MirrorKind::NegativeEntropy, &simplex).unwrap();
        let x = ne.clamp_interior(&[1.0, 0.0, 0.0]);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|&v| v > 0.0));
    }
}

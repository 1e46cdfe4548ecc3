//! Graph topology, doubly stochastic weight construction, spectral gap, and
//! the consensus mixing step.
//!
//! Weight matrices built here are symmetric, doubly stochastic, and supported
//! on the graph edges plus the diagonal. The cached `sigma2` is the
//! second-largest eigenvalue magnitude, which governs how fast the mixing
//! step contracts disagreement between agents.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};

/// Row/column-sum tolerance for doubly stochastic validation.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Undirected simple graph on `n` nodes. Edges are normalized to `(i, j)`
/// with `i < j`, deduplicated, and the graph is validated to be connected.
#[derive(Debug, Clone)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(n: usize, raw_edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("node count must be positive".into()));
        }
        let mut edges = Vec::with_capacity(raw_edges.len());
        for &(a, b) in raw_edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) out of range for n={n}"
                )));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at node {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
        edges.sort_unstable();
        let topo = Topology { n, edges };
        if let Some(unreached) = topo.first_unreachable() {
            return Err(Error::Graph(format!(
                "graph is disconnected: node {unreached} is unreachable from node 0"
            )));
        }
        Ok(topo)
    }

    /// BFS from node 0; returns the smallest unreachable node, if any.
    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &self.edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn ring(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).filter(|&(a, b)| a != b).collect();
        Topology::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Topology::new(n, &edges)
    }

    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Topology::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Topology::new(n, &edges)
    }

    /// Erdos-Renyi G(n, p), redrawn until connected (at most 1000 draws).
    pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Graph(format!("edge probability {p} outside [0, 1]")));
        }
        for _ in 0..1000 {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            if let Ok(topo) = Topology::new(n, &edges) {
                return Ok(topo);
            }
        }
        Err(Error::Graph(format!(
            "no connected G({n}, {p}) draw within 1000 attempts"
        )))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Symmetric doubly stochastic mixing matrix with cached spectral gap.
///
/// Immutable after construction; safe to share across concurrent workers.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>, // row-major n x n
    sigma2: f64,
}

impl WeightMatrix {
    /// Metropolis weights: `w[i][j] = 1 / (1 + max(deg_i, deg_j))` on edges,
    /// with the diagonal absorbing the remainder. Satisfies double
    /// stochasticity for any connected topology.
    pub fn metropolis(topo: &Topology) -> Result<Self> {
        let n = topo.n();
        let deg: Vec<usize> = (0..n).map(|v| topo.degree(v)).collect();
        let mut w = vec![0.0; n * n];
        for &(i, j) in topo.edges() {
            let wij = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
            w[i * n + j] = wij;
            w[j * n + i] = wij;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[i * n + j]).sum();
            w[i * n + i] = 1.0 - off;
        }
        Self::from_raw(n, w)
    }

    /// Direct loader for a user-supplied matrix, fully validated.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("weight matrix must be square and nonempty".into()));
        }
        let mut w = Vec::with_capacity(n * n);
        for r in rows {
            w.extend_from_slice(r);
        }
        Self::from_raw(n, w)
    }

    fn from_raw(n: usize, w: Vec<f64>) -> Result<Self> {
        validate_doubly_stochastic(n, &w)?;
        let sigma2 = sigma2_of(n, &w);
        Ok(WeightMatrix { n, w, sigma2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// Second-largest eigenvalue magnitude.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Consensus step: `out[i] = sum_j w[i][j] * ys[j]`.
    ///
    /// Summation order is fixed (ascending j), so the result does not depend
    /// on any worker partitioning done by callers.
    pub fn mix(&self, ys: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if ys.len() != self.n {
            return Err(Error::Dimension(format!(
                "mix expects {} vectors, got {}",
                self.n,
                ys.len()
            )));
        }
        let d = ys.first().map_or(0, |v| v.len());
        if ys.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension("mix input vectors have mixed dimensions".into()));
        }
        let mut out = vec![vec![0.0; d]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let wij = self.w[i * self.n + j];
                if wij != 0.0 {
                    crate::vecops::axpy(&mut out[i], wij, &ys[j]);
                }
            }
        }
        Ok(out)
    }
}

fn validate_doubly_stochastic(n: usize, w: &[f64]) -> Result<()> {
    debug_assert_eq!(w.len(), n * n);
    for i in 0..n {
        for j in 0..n {
            let wij = w[i * n + j];
            if !(0.0..=1.0 + STOCHASTIC_TOL).contains(&wij) {
                return Err(Error::Domain(format!(
                    "weight w[{i}][{j}] = {wij} outside [0, 1]"
                )));
            }
            if wij != w[j * n + i] {
                return Err(Error::Domain(format!(
                    "weight matrix not symmetric at ({i}, {j})"
                )));
            }
        }
        let row: f64 = (0..n).map(|j| w[i * n + j]).sum();
        let col: f64 = (0..n).map(|j| w[j * n + i]).sum();
        if (row - 1.0).abs() > STOCHASTIC_TOL || (col - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Domain(format!(
                "row/column {i} sums ({row}, {col}) deviate from 1 beyond {STOCHASTIC_TOL}"
            )));
        }
    }
    Ok(())
}

fn sigma2_of(n: usize, w: &[f64]) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| w[i * n + j]);
    let eig = SymmetricEigen::new(m);
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mags[1]
}

/// Second-largest eigenvalue magnitude of a symmetric doubly stochastic
/// matrix given as rows. Validates the input first.
pub fn spectral_gap(rows: &[Vec<f64>]) -> Result<f64> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("spectral_gap expects a square matrix".into()));
    }
    let mut w = Vec::with_capacity(n * n);
    for r in rows {
        w.extend_from_slice(r);
    }
    validate_doubly_stochastic(n, &w)?;
    Ok(sigma2_of(n, &w))
}

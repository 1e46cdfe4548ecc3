//! Run configuration: JSON schema, strict parsing, and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithm::{Mode, Schedule};
use crate::error::{Error, Result};
use crate::mirror::{FeasibleSet, MirrorKind, MirrorMap};
use crate::network::{Topology, WeightMatrix};
use crate::problems::{Suite, SuiteKind, SuiteParams};
use crate::rngs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Ring,
    Path,
    Star,
    Complete,
    ErdosRenyi,
    Explicit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphKind,
    /// Node count; defaults to `problem.n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Edge probability for `erdos_renyi` (default 0.3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Edge list for `explicit` (0-based node indices).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: SuiteKind,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub drift_rho: f64,
    pub drift_delta: f64,
    /// Suite seed; defaults to the top-level seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub mirror: MirrorKind,
    pub feasible_set: FeasibleSet,
    pub problem: ProblemSpec,
    pub schedule: ScheduleSpec,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_mode() -> Mode {
    Mode::Strict
}

fn default_threads() -> usize {
    1
}

impl RunConfig {
    /// Whole-config validation; every failure names the offending key.
    pub fn validate(&self) -> Result<()> {
        Schedule::new(self.schedule.a, self.schedule.b)?;
        self.feasible_set.validate()?;
        let params = self.suite_params();
        params.validate()?;
        if self.feasible_set.dim() != self.problem.d {
            return Err(Error::Config(format!(
                "feasible_set dimension {} does not match problem.d = {}",
                self.feasible_set.dim(),
                self.problem.d
            )));
        }
        // Supported (mirror, set) pairs.
        MirrorMap::new(self.mirror, &self.feasible_set)?;
        if let Some(n) = self.graph.n {
            if n != self.problem.n {
                return Err(Error::Config(format!(
                    "graph.n = {n} does not match problem.n = {}",
                    self.problem.n
                )));
            }
        }
        match self.graph.kind {
            GraphKind::Explicit => {
                if self.graph.edges.is_none() {
                    return Err(Error::Config(
                        "graph.edges is required when graph.kind = explicit".into(),
                    ));
                }
            }
            GraphKind::ErdosRenyi => {
                if let Some(p) = self.graph.p {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Config(format!("graph.p = {p} outside [0, 1]")));
                    }
                }
            }
            _ => {
                if self.graph.edges.is_some() {
                    return Err(Error::Config(
                        "graph.edges is only accepted when graph.kind = explicit".into(),
                    ));
                }
            }
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn suite_params(&self) -> SuiteParams {
        SuiteParams {
            kind: self.problem.kind,
            agents: self.problem.n,
            dim: self.problem.d,
            constraints: self.problem.m,
            horizon: self.problem.horizon,
            drift_rho: self.problem.drift_rho,
            drift_delta: self.problem.drift_delta,
            seed: self.problem.seed.unwrap_or(self.seed),
        }
    }

    pub fn build_topology(&self) -> Result<Topology> {
        let n = self.graph.n.unwrap_or(self.problem.n);
        match self.graph.kind {
            GraphKind::Ring => Topology::ring(n),
            GraphKind::Path => Topology::path(n),
            GraphKind::Star => Topology::star(n),
            GraphKind::Complete => Topology::complete(n),
            GraphKind::ErdosRenyi => {
                let p = self.graph.p.unwrap_or(0.3);
                let mut rng = rngs::substream(self.seed, "graph");
                Topology::erdos_renyi(n, p, &mut rng)
            }
            GraphKind::Explicit => {
                let edges = self.graph.edges.clone().ok_or_else(|| {
                    Error::Config("graph.edges is required when graph.kind = explicit".into())
                })?;
                Topology::new(n, &edges)
            }
        }
    }

    pub fn build_weights(&self) -> Result<WeightMatrix> {
        WeightMatrix::metropolis(&self.build_topology()?)
    }

    pub fn build_suite(&self) -> Result<Suite> {
        Suite::generate(self.suite_params(), self.feasible_set.clone())
    }

    pub fn build_mirror(&self) -> Result<MirrorMap> {
        MirrorMap::new(self.mirror, &self.feasible_set)
    }

    pub fn build_schedule(&self) -> Result<Schedule> {
        Schedule::new(self.schedule.a, self.schedule.b)
    }
}

/// Parse and validate a config file. Parse failures carry serde's message,
/// which names unknown or missing keys.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "graph": {"kind": "ring"},
            "mirror": "euclidean",
            "feasible_set": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
            "problem": {
                "kind": "tracking",
                "n": 4, "d": 2, "m": 2, "T": 16,
                "drift_rho": 1.0, "drift_delta": 0.2
            },
            "schedule": {"a": 0.6666666666666666, "b": 0.3333333333333333},
            "seed": 7
        })
    }

    fn parse(v: serde_json::Value) -> Result<RunConfig> {
        let config: RunConfig = serde_json::from_value(v)
            .map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse(minimal_json()).unwrap();
        assert_eq!(cfg.mode, Mode::Strict);
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.suite_params().seed, 7);
    }

    #[test]
    fn schedule_order_violation_names_keys() {
        let mut v = minimal_json();
        v["schedule"]["a"] = serde_json::json!(0.3);
        v["schedule"]["b"] = serde_json::json!(0.5);
        let err = parse(v).unwrap_err().to_string();
        assert!(err.contains("schedule.a") && err.contains("schedule.b"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let mut v = minimal_json();
        v["frobnicate"] = serde_json::json!(1);
        let err = parse(v).unwrap_err().to_string();
        assert!(err.contains("frobnicate"), "{err}");
    }

    #[test]
    fn mismatched_set_dimension_is_rejected() {
        let mut v = minimal_json();
        v["problem"]["d"] = serde_json::json!(3);
        let err = parse(v).unwrap_err().to_string();
        assert!(err.contains("problem.d"), "{err}");
    }

    #[test]
    fn entropy_requires_simplex() {
        let mut v = minimal_json();
        v["mirror"] = serde_json::json!("negative_entropy");
        assert!(parse(v).is_err());

        let mut v = minimal_json();
        v["mirror"] = serde_json::json!("negative_entropy");
        v["feasible_set"] = serde_json::json!({"kind": "simplex", "dim": 2});
        assert!(parse(v).is_ok());
    }

    #[test]
    fn explicit_graph_requires_edges() {
        let mut v = minimal_json();
        v["graph"] = serde_json::json!({"kind": "explicit"});
        assert!(parse(v).is_err());
        let mut v = minimal_json();
        v["graph"] = serde_json::json!({"kind": "explicit", "edges": [[0,1],[1,2],[2,3]]});
        assert!(parse(v).is_ok());
    }

    #[test]
    fn graph_node_count_must_match_problem() {
        let mut v = minimal_json();
        v["graph"]["n"] = serde_json::json!(5);
        let err = parse(v).unwrap_err().to_string();
        assert!(err.contains("graph.n"), "{err}");
    }
}

//! Crate-wide error type.

use std::path::PathBuf;

/// Diagnostics attached to a failed constrained solve.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    /// Total inner iterations spent across all penalty stages.
    pub iterations: usize,
    /// Gradient-mapping norm at exit of the last stage.
    pub gradient_mapping: f64,
    /// Worst constraint violation at the returned point.
    pub max_violation: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("invariant `{name}` violated at t={t}, node={node}: {detail}")]
    Invariant {
        name: &'static str,
        t: usize,
        node: usize,
        detail: String,
    },

    #[error(
        "solver did not converge: {message} (iterations={}, gradient_mapping={:.3e}, max_violation={:.3e})",
        diagnostics.iterations,
        diagnostics.gradient_mapping,
        diagnostics.max_violation
    )]
    Solver {
        message: String,
        diagnostics: SolveDiagnostics,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

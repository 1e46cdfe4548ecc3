//! Distributed online convex optimization with time-varying constraints.
//!
//! A network of agents repeatedly takes actions in a shared convex compact
//! set; each round reveals per-agent convex losses and constraint functions
//! only after the actions are taken. Each agent runs a local mirror-descent
//! primal step and a regularized dual ascent step, then mixes its primal
//! iterate with its neighbors through a symmetric doubly stochastic weight
//! matrix.
//!
//! The crate provides:
//!
//! - [`network`]: graph topologies, Metropolis weights, spectral gap, and
//!   the consensus mixing step;
//! - [`mirror`]: Bregman divergences, regularized Bregman projections, and
//!   closed-form set projections;
//! - [`problems`]: seeded problem suites with certified regularity
//!   constants;
//! - [`algorithm`]: the per-round engine with runtime invariant checks
//!   (dual norm bound, iterate feasibility, non-negativity);
//! - [`evaluation`]: comparator oracle, dynamic regret, fit, network-error
//!   checks, bound constants, and log-log slope estimation;
//! - [`config`] and [`orchestrate`]: JSON configs, CSV/JSON artifacts, the
//!   sweep harness, and sampled property checks.

pub mod algorithm;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod mirror;
pub mod network;
pub mod orchestrate;
pub mod problems;
pub mod rngs;
pub mod vecops;

pub use error::{Error, Result};

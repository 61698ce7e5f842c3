//! Online learning with side observations: Exp3-IX for multi-armed bandits,
//! FPL-IX for combinatorial semi-bandits, the baselines they are compared
//! against, and the graph-theoretic bounds that govern their regret.
//!
//! The loop is: an oblivious [`environment`] commits to losses and
//! observability graphs, [`environment::run_protocol`] plays them against a
//! [`Policy`], and [`bounds`] turns the logs into regret and bound values.
//! [`harness`] wraps this into seeded, parallel replications with CSV and
//! JSON output; [`verify`] holds the randomized property suites.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod environment;
pub mod error;
pub mod exp3ix;
pub mod fplix;
pub mod graph;
pub mod harness;
pub mod policy;
pub mod rng;
pub mod verify;

pub use environment::{
    run_protocol, EnvironmentConfig, EnvironmentTrace, GraphKind, LossKind, RoundLog,
};
pub use error::{Error, Result};
pub use exp3ix::{Exp3, Exp3Dom, Exp3Ix, Hedge};
pub use fplix::{DecisionSet, DecisionSetKind, FplFullInfo, FplIx, MSets, Simplex};
pub use graph::ObservabilityGraph;
pub use harness::{run_experiment, ExperimentConfig, ExperimentResult, PolicyKind};
pub use policy::{Action, Policy, RevealedLosses};
pub use rng::{Role, SeedTree};

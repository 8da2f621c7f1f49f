//! Schedule- and dependency-aware bug triage.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the shared domain types (bugs, developers, the
//!   dependency graph, the assignment ledger and triage plans).
//! * [`ingest`] reconstructs event timelines from a Bugzilla-style REST API
//!   or an archived dump, filters them and estimates developer capacity.
//! * [`textmine`] turns bug text into suitability scores and fixing costs.
//! * [`ilp`] is a small exact 0-1 programming solver.
//! * [`strategies`] builds the per-day triage models and baselines.
//! * [`sim`] replays an issue tracker day by day under a strategy.
//! * [`metrics`] computes comparison metrics and paired significance tests.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod config;
pub mod ilp;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod quantile;
pub mod sim;
pub mod strategies;
pub mod synth;
pub mod textmine;

pub use model::{BugId, Day, DevId};

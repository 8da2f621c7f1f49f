//! Run configuration shared by the library and the command-line front end.
//!
//! Every field has a default, so an empty TOML document is a valid
//! configuration.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::ilp::{Budget, SolveOptions, TieBreak};
use crate::par::Execution;
use crate::{Day, DevId};

/// Planning horizon in days, or `auto` to take the third quartile of the
/// training fixing times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Horizon {
    #[default]
    Auto,
    Days(usize),
}

impl Serialize for Horizon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Horizon::Auto => s.serialize_str("auto"),
            Horizon::Days(d) => s.serialize_u64(*d as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Days(u64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) if t == "auto" => Ok(Horizon::Auto),
            Raw::Text(t) => t.parse().map(Horizon::Days).map_err(|_| serde::de::Error::custom(format!("invalid horizon `{t}`"))),
            Raw::Days(0) => Err(serde::de::Error::custom("horizon must be at least 1 day")),
            Raw::Days(n) => Ok(Horizon::Days(n as usize)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Misclassification penalty per training document.
    pub c: f64,
    pub max_epochs: usize,
    /// Stopping threshold on the projected-gradient spread.
    pub tolerance: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1000.0, max_epochs: 2000, tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicConfig {
    /// Fixed topic count; `None` selects one from `candidates`.
    pub k: Option<usize>,
    pub candidates: (usize, usize),
    pub alpha: f64,
    pub beta: f64,
    pub burn_in: usize,
    pub samples: usize,
    pub fold_in_iterations: usize,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig { k: None, candidates: (2, 8), alpha: 0.1, beta: 0.01, burn_in: 500, samples: 100, fold_in_iterations: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_nodes: u64,
    /// Wall-clock limit per solve, in seconds.
    pub max_seconds: Option<f64>,
    pub split_depth: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_nodes: 5_000_000, max_seconds: None, split_depth: 0 }
    }
}

impl SolverConfig {
    pub fn options(&self, execution: Execution) -> SolveOptions {
        SolveOptions {
            budget: Budget { max_nodes: self.max_nodes, max_time: self.max_seconds.map(Duration::from_secs_f64) },
            tie_break: TieBreak::Lexicographic,
            split_depth: self.split_depth,
            execution,
        }
    }
}

/// A day on which a developer (or everyone, when `developer` is absent)
/// does not work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffDay {
    #[serde(default)]
    pub developer: Option<DevId>,
    pub day: Day,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    pub token_env: String,
    pub cache_dir: Option<String>,
    pub max_concurrency: usize,
    pub retries: u32,
    pub backoff_ms: u64,
    /// Calendar date mapped to day 0, as `YYYY-MM-DD`.
    pub epoch: String,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            endpoint: None,
            token_env: "BUGZILLA_API_KEY".into(),
            cache_dir: None,
            max_concurrency: 4,
            retries: 3,
            backoff_ms: 500,
            epoch: "2010-01-01".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub project: String,
    pub alpha: f64,
    pub horizon: Horizon,
    pub seed: u64,
    pub cf_neighbors: usize,
    pub train_window: (Day, Day),
    pub test_window: (Day, Day),
    pub execution: Execution,
    pub threads: Option<usize>,
    pub off_days: Vec<OffDay>,
    pub svm: SvmConfig,
    pub topics: TopicConfig,
    pub solver: SolverConfig,
    pub ingest: IngestConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            project: "project".into(),
            alpha: 0.5,
            horizon: Horizon::Auto,
            seed: 42,
            cf_neighbors: 5,
            train_window: (0, 364),
            test_window: (365, 729),
            execution: Execution::Parallel,
            threads: None,
            off_days: Vec::new(),
            svm: SvmConfig::default(),
            topics: TopicConfig::default(),
            solver: SolverConfig::default(),
            ingest: IngestConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("window {0:?} is empty")]
    EmptyWindow((Day, Day)),
    #[error("training window must end before the test window starts")]
    Overlap,
    #[error("topic candidates {0:?} must satisfy 2 <= min <= max")]
    Candidates((usize, usize)),
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        for w in [self.train_window, self.test_window] {
            if w.1 < w.0 {
                return Err(ConfigError::EmptyWindow(w));
            }
        }
        if self.train_window.1 >= self.test_window.0 {
            return Err(ConfigError::Overlap);
        }
        let (lo, hi) = self.topics.candidates;
        if lo < 2 || hi < lo {
            return Err(ConfigError::Candidates(self.topics.candidates));
        }
        Ok(())
    }
}

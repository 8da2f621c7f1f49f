//! Domain types shared by every other module.

mod bug;
mod developer;
mod graph;
mod ledger;
mod plan;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bug::{BugRecord, BugStatus};
pub use developer::{Calendar, DeveloperProfile};
pub use graph::{DependencyGraph, GraphError};
pub use ledger::{AssignedBugLedger, LedgerEntry, LedgerError};
pub use plan::{PlanStatus, PlannedAssignment, TriagePlan};

/// Day index counted from the start of the loaded history.
pub type Day = i64;

/// Opaque bug identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BugId(pub u64);

impl fmt::Display for BugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque developer identifier (usually the Bugzilla login).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DevId(pub String);

impl DevId {
    pub fn new(s: impl Into<String>) -> Self {
        DevId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DevId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DevId {
    fn from(s: &str) -> Self {
        DevId(s.to_owned())
    }
}

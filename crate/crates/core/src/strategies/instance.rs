use serde::{Deserialize, Serialize};

use crate::model::Calendar;
use crate::{BugId, Day, DevId};

/// A bug in one day's triage problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceBug {
    pub id: BugId,
    /// Suitability per developer, in instance developer order, all positive.
    pub suitability: Vec<f64>,
    /// Whole fixing days per developer, all at least 1.
    pub cost: Vec<u32>,
    /// Indices (into the instance bug list) of open, unassigned blockers.
    pub open_parents: Vec<usize>,
    /// Assigned but unfinished blockers with their completion day in the
    /// current frame (day 1 is today).
    pub ledger_parents: Vec<(BugId, usize)>,
    /// Historical assignment, used only by the replay of real decisions.
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub developer: DevId,
    pub assign_day: Day,
    pub duration: u32,
}

impl InstanceBug {
    /// Earliest frame day this bug may start given its assigned blockers.
    pub fn earliest_start(&self) -> usize {
        self.ledger_parents.iter().map(|&(_, tau)| tau + 1).max().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDeveloper {
    pub id: DevId,
    /// Number of slots the developer is planned with. The calendar may have
    /// extra rows when historical replays needed more.
    pub slot_count: usize,
    pub calendar: Calendar,
    /// Per calendar row, the last frame day already taken by earlier
    /// assignments (0 when none). Days after the horizon up to this one are
    /// busy.
    pub busy_until: Vec<usize>,
}

impl InstanceDeveloper {
    pub fn new(id: DevId, calendar: Calendar) -> Self {
        let slots = calendar.slots();
        InstanceDeveloper { id, slot_count: slots, calendar, busy_until: vec![0; slots] }
    }
}

/// One day's triage problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageInstance {
    pub day: Day,
    pub horizon: usize,
    pub alpha: f64,
    pub developers: Vec<InstanceDeveloper>,
    pub bugs: Vec<InstanceBug>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InstanceError {
    #[error("alpha {0} outside [0, 1]")]
    Alpha(f64),
    #[error("bug {0}: expected one suitability and cost per developer")]
    Width(BugId),
    #[error("bug {0}: suitability must be positive and cost at least 1")]
    Values(BugId),
    #[error("developer {0}: calendar does not match the horizon or slot count")]
    Calendar(DevId),
    #[error("bug {0}: parent index out of range or self-referencing")]
    Parent(BugId),
    #[error("coefficient needs at least one developer")]
    Empty,
}

/// Weighted mix of normalized suitability and normalized inverse cost for
/// developer `d`; lies in `(0, 1]` and equals 1 for a developer that is
/// both the most suitable and the cheapest.
pub fn coefficient(alpha: f64, suitability: &[f64], cost: &[u32], d: usize) -> Result<f64, InstanceError> {
    if suitability.is_empty() || cost.is_empty() {
        return Err(InstanceError::Empty);
    }
    let s_max = suitability.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_min = *cost.iter().min().unwrap() as f64;
    Ok(alpha * suitability[d] / s_max + (1.0 - alpha) * c_min / cost[d] as f64)
}

impl TriageInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(InstanceError::Alpha(self.alpha));
        }
        let n = self.developers.len();
        for d in &self.developers {
            let c = &d.calendar;
            if c.horizon() != self.horizon || c.slots() < d.slot_count || d.slot_count == 0 || d.busy_until.len() != c.slots() {
                return Err(InstanceError::Calendar(d.id.clone()));
            }
        }
        for (i, b) in self.bugs.iter().enumerate() {
            if b.suitability.len() != n || b.cost.len() != n {
                return Err(InstanceError::Width(b.id));
            }
            if b.suitability.iter().any(|&s| s <= 0.0 || !s.is_finite()) || b.cost.iter().any(|&c| c < 1) {
                return Err(InstanceError::Values(b.id));
            }
            if b.open_parents.iter().any(|&p| p >= self.bugs.len() || p == i) {
                return Err(InstanceError::Parent(b.id));
            }
        }
        Ok(())
    }

    pub fn bug_ids(&self) -> Vec<BugId> {
        self.bugs.iter().map(|b| b.id).collect()
    }

    pub fn coefficient(&self, i: usize, d: usize) -> f64 {
        let b = &self.bugs[i];
        coefficient(self.alpha, &b.suitability, &b.cost, d).expect("validated instance")
    }

    /// Suitability of `d` for bug `i` relative to the best developer.
    pub fn relative_suitability(&self, i: usize, d: usize) -> f64 {
        let s = &self.bugs[i].suitability;
        s[d] / s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of a bug by id.
    pub fn index_of(&self, bug: BugId) -> Option<usize> {
        self.bugs.iter().position(|b| b.id == bug)
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{BugId, DevId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Optimal,
    FeasibleTimeout,
    InfeasibleEmpty,
}

/// One `(bug, developer, slot, start)` decision. `start_day` is 1-based
/// within the current planning frame: `t = 1` is the decision day itself.
/// `duration` is the number of days the bug occupies the slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedAssignment {
    pub bug: BugId,
    pub developer: DevId,
    pub slot: usize,
    pub start_day: usize,
    pub duration: u32,
}

impl PlannedAssignment {
    /// Last occupied frame day.
    pub fn finish_day(&self) -> usize {
        self.start_day + self.duration as usize - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriagePlan {
    pub assignments: Vec<PlannedAssignment>,
    pub deferred: Vec<BugId>,
    pub objective_value: f64,
    pub solver_status: PlanStatus,
}

impl TriagePlan {
    pub fn empty(deferred: Vec<BugId>) -> Self {
        TriagePlan { assignments: Vec::new(), deferred, objective_value: 0.0, solver_status: PlanStatus::Optimal }
    }

    /// Every bug of `instance_bugs` appears exactly once across assignments
    /// and deferrals, and nothing else appears.
    pub fn partitions(&self, instance_bugs: &[BugId]) -> bool {
        let mut seen = BTreeSet::new();
        for b in self.assignments.iter().map(|a| a.bug).chain(self.deferred.iter().copied()) {
            if !seen.insert(b) {
                return false;
            }
        }
        seen.len() == instance_bugs.len() && instance_bugs.iter().all(|b| seen.contains(b))
    }

    pub fn assignment_for(&self, bug: BugId) -> Option<&PlannedAssignment> {
        self.assignments.iter().find(|a| a.bug == bug)
    }
}

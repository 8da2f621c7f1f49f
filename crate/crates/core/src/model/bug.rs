use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{BugId, Day, DevId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugStatus {
    Open,
    Assigned,
    Fixed,
    Excluded,
}

/// One bug with its text, lifecycle dates and dependency links.
///
/// `depends_on` holds the bugs that block this one and `blocks` the bugs it
/// blocks; the two sides are kept consistent across a collection by
/// [`BugRecord::link_consistent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugRecord {
    pub id: BugId,
    pub summary: String,
    pub description: String,
    pub component: String,
    pub report_day: Day,
    pub actual_assign_day: Option<Day>,
    pub actual_fix_day: Option<Day>,
    pub actual_assignee: Option<DevId>,
    pub status: BugStatus,
    #[serde(default)]
    pub depends_on: BTreeSet<BugId>,
    #[serde(default)]
    pub blocks: BTreeSet<BugId>,
    #[serde(default)]
    pub is_meta: bool,
    #[serde(default)]
    pub topic: Option<usize>,
    #[serde(default)]
    pub fixing_time_days: Option<u32>,
}

impl BugRecord {
    pub fn new(id: BugId, report_day: Day) -> Self {
        BugRecord {
            id,
            summary: String::new(),
            description: String::new(),
            component: String::new(),
            report_day,
            actual_assign_day: None,
            actual_fix_day: None,
            actual_assignee: None,
            status: BugStatus::Open,
            depends_on: BTreeSet::new(),
            blocks: BTreeSet::new(),
            is_meta: false,
            topic: None,
            fixing_time_days: None,
        }
    }

    /// Ground-truth occupancy in days: assignment day through fix day,
    /// inclusive. `None` when either date is missing or out of order.
    pub fn ground_truth_duration(&self) -> Option<u32> {
        match (self.actual_assign_day, self.actual_fix_day) {
            (Some(a), Some(f)) if f >= a => Some((f - a + 1) as u32),
            _ => None,
        }
    }

    /// Checks `actual_fix_day >= actual_assign_day >= report_day` for the
    /// dates that are present.
    pub fn dates_ordered(&self) -> bool {
        let assign_ok = self.actual_assign_day.is_none_or(|a| a >= self.report_day);
        let fix_ok = match (self.actual_assign_day, self.actual_fix_day) {
            (Some(a), Some(f)) => f >= a,
            (None, Some(f)) => f >= self.report_day,
            _ => true,
        };
        assign_ok && fix_ok
    }

    /// Verifies `i in j.blocks <=> j in i.depends_on` across `bugs`, ignoring
    /// links to bugs outside the collection.
    pub fn link_consistent(bugs: &std::collections::BTreeMap<BugId, BugRecord>) -> bool {
        bugs.values().all(|b| {
            b.depends_on
                .iter()
                .all(|p| bugs.get(p).is_none_or(|pb| pb.blocks.contains(&b.id)))
                && b
                    .blocks
                    .iter()
                    .all(|c| bugs.get(c).is_none_or(|cb| cb.depends_on.contains(&b.id)))
        })
    }
}

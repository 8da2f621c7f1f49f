use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BugId, Day, DevId};

/// Where and when an assigned bug is being worked on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub developer: DevId,
    pub slot: usize,
    pub start_day: Day,
    /// Last day of work, `start_day + cost_used - 1`.
    pub completion_day: Day,
    pub cost_used: u32,
}

impl LedgerEntry {
    pub fn new(developer: DevId, slot: usize, start_day: Day, cost_used: u32) -> Self {
        assert!(cost_used >= 1, "a bug takes at least one day");
        LedgerEntry { developer, slot, start_day, completion_day: start_day + cost_used as Day - 1, cost_used }
    }

    pub fn occupies(&self, day: Day) -> bool {
        self.start_day <= day && day <= self.completion_day
    }

    fn overlaps(&self, other: &LedgerEntry) -> bool {
        self.developer == other.developer
            && self.slot == other.slot
            && self.start_day <= other.completion_day
            && other.start_day <= self.completion_day
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("bug {0} is already in the ledger")]
    Duplicate(BugId),
    #[error("bug {bug} overlaps bug {other} on developer {developer} slot {slot}")]
    Overlap { bug: BugId, other: BugId, developer: DevId, slot: usize },
}

/// Bugs that are assigned but not yet solved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignedBugLedger {
    entries: BTreeMap<BugId, LedgerEntry>,
}

impl AssignedBugLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, bug: BugId, entry: LedgerEntry) -> Result<(), LedgerError> {
        if self.entries.contains_key(&bug) {
            return Err(LedgerError::Duplicate(bug));
        }
        if let Some((&other, _)) = self.entries.iter().find(|(_, e)| e.overlaps(&entry)) {
            return Err(LedgerError::Overlap { bug, other, developer: entry.developer, slot: entry.slot });
        }
        self.entries.insert(bug, entry);
        Ok(())
    }

    pub fn get(&self, bug: BugId) -> Option<&LedgerEntry> {
        self.entries.get(&bug)
    }

    pub fn remove(&mut self, bug: BugId) -> Option<LedgerEntry> {
        self.entries.remove(&bug)
    }

    pub fn contains(&self, bug: BugId) -> bool {
        self.entries.contains_key(&bug)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BugId, &LedgerEntry)> {
        self.entries.iter().map(|(&b, e)| (b, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Bugs whose last day of work is `day`.
    pub fn completing_on(&self, day: Day) -> Vec<BugId> {
        self.entries.iter().filter(|(_, e)| e.completion_day == day).map(|(&b, _)| b).collect()
    }

    /// Pairwise disjointness of occupancy per (developer, slot).
    pub fn is_disjoint(&self) -> bool {
        let mut by_lane: BTreeMap<(&DevId, usize), Vec<(Day, Day)>> = BTreeMap::new();
        for e in self.entries.values() {
            by_lane.entry((&e.developer, e.slot)).or_default().push((e.start_day, e.completion_day));
        }
        by_lane.into_values().all(|mut v| {
            v.sort_unstable();
            v.windows(2).all(|w| w[0].1 < w[1].0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_day_is_inclusive() {
        let e = LedgerEntry::new(DevId::from("d"), 0, 5, 3);
        assert_eq!(e.completion_day, 7);
        assert!(e.occupies(7) && !e.occupies(8));
    }

    #[test]
    fn overlapping_entries_rejected() {
        let mut l = AssignedBugLedger::new();
        l.insert(BugId(1), LedgerEntry::new("d".into(), 0, 1, 3)).unwrap();
        assert!(matches!(
            l.insert(BugId(2), LedgerEntry::new("d".into(), 0, 3, 1)),
            Err(LedgerError::Overlap { .. })
        ));
        l.insert(BugId(2), LedgerEntry::new("d".into(), 1, 3, 1)).unwrap();
        l.insert(BugId(3), LedgerEntry::new("d".into(), 0, 4, 2)).unwrap();
        assert!(l.is_disjoint());
        assert_eq!(l.completing_on(3), vec![BugId(1), BugId(2)]);
    }
}

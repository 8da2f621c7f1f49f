//! Plan checks computed from the instance alone, without looking at any
//! 0-1 program.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{PlannedAssignment, TriagePlan};
use crate::BugId;

use super::instance::TriageInstance;

/// Which rules a plan is held to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rules {
    /// Every assigned bug finishes by the horizon and uses a planned slot.
    pub horizon: bool,
    /// Open blockers are planned and finish first; assigned blockers finish
    /// before the start.
    pub dependencies: bool,
    /// The planned duration equals the developer's cost for the bug.
    pub costed_durations: bool,
}

impl Rules {
    pub const SCHEDULED: Rules = Rules { horizon: true, dependencies: true, costed_durations: true };
    pub const QUEUED: Rules = Rules { horizon: false, dependencies: false, costed_durations: true };
    pub const HISTORICAL: Rules = Rules { horizon: false, dependencies: false, costed_durations: false };
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownBug(BugId),
    UnknownDeveloper(BugId),
    AssignedTwice(BugId),
    NotPartitioned(BugId),
    BadDuration(BugId),
    PastHorizon(BugId),
    SlotOutOfRange(BugId),
    Overlap { a: BugId, b: BugId },
    CalendarBusy(BugId),
    ParentUnassigned { parent: BugId, child: BugId },
    StartsBeforeParent { parent: BugId, child: BugId },
    StartsBeforeLedgerParent { parent: BugId, child: BugId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownBug(b) => write!(f, "bug {b} is not in the instance"),
            Violation::UnknownDeveloper(b) => write!(f, "bug {b} is given to an unknown developer"),
            Violation::AssignedTwice(b) => write!(f, "bug {b} is assigned more than once"),
            Violation::NotPartitioned(b) => write!(f, "bug {b} is neither assigned nor deferred exactly once"),
            Violation::BadDuration(b) => write!(f, "bug {b} has a duration other than its cost"),
            Violation::PastHorizon(b) => write!(f, "bug {b} finishes after the horizon"),
            Violation::SlotOutOfRange(b) => write!(f, "bug {b} uses a slot the developer does not have"),
            Violation::Overlap { a, b } => write!(f, "bugs {a} and {b} share a slot day"),
            Violation::CalendarBusy(b) => write!(f, "bug {b} is placed on a busy calendar day"),
            Violation::ParentUnassigned { parent, child } => write!(f, "bug {child} is assigned without its blocker {parent}"),
            Violation::StartsBeforeParent { parent, child } => write!(f, "bug {child} starts before blocker {parent} finishes"),
            Violation::StartsBeforeLedgerParent { parent, child } => {
                write!(f, "bug {child} starts before assigned blocker {parent} finishes")
            }
        }
    }
}

/// Lists every rule the plan breaks; an empty list means the plan is valid.
pub fn validate_plan(instance: &TriageInstance, plan: &TriagePlan, rules: Rules) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<BugId, &PlannedAssignment> = BTreeMap::new();
    let index: BTreeMap<BugId, usize> = instance.bugs.iter().enumerate().map(|(i, b)| (b.id, i)).collect();

    for a in &plan.assignments {
        let Some(&i) = index.get(&a.bug) else {
            out.push(Violation::UnknownBug(a.bug));
            continue;
        };
        if seen.insert(a.bug, a).is_some() {
            out.push(Violation::AssignedTwice(a.bug));
        }
        let Some(d) = instance.developers.iter().position(|d| d.id == a.developer) else {
            out.push(Violation::UnknownDeveloper(a.bug));
            continue;
        };
        if a.duration == 0 || (rules.costed_durations && a.duration != instance.bugs[i].cost[d]) {
            out.push(Violation::BadDuration(a.bug));
        }
        if rules.horizon {
            if a.finish_day() > instance.horizon {
                out.push(Violation::PastHorizon(a.bug));
            }
            if a.slot >= instance.developers[d].slot_count {
                out.push(Violation::SlotOutOfRange(a.bug));
            }
        }
        let dev = &instance.developers[d];
        if a.slot < dev.calendar.slots() {
            let busy = (a.start_day..=a.finish_day()).any(|u| {
                if u <= instance.horizon {
                    !dev.calendar.is_free(a.slot, u)
                } else {
                    u <= dev.busy_until[a.slot]
                }
            });
            if a.start_day == 0 || busy {
                out.push(Violation::CalendarBusy(a.bug));
            }
        }
    }

    let deferred: BTreeSet<BugId> = plan.deferred.iter().copied().collect();
    for b in &instance.bugs {
        let n = plan.assignments.iter().filter(|a| a.bug == b.id).count() + plan.deferred.iter().filter(|&&x| x == b.id).count();
        if n != 1 {
            out.push(Violation::NotPartitioned(b.id));
        }
    }
    for id in &deferred {
        if !index.contains_key(id) {
            out.push(Violation::UnknownBug(*id));
        }
    }

    let mut by_slot: BTreeMap<(&str, usize), Vec<&PlannedAssignment>> = BTreeMap::new();
    for a in &plan.assignments {
        by_slot.entry((a.developer.as_str(), a.slot)).or_default().push(a);
    }
    for list in by_slot.values_mut() {
        list.sort_by_key(|a| (a.start_day, a.bug));
        for w in list.windows(2) {
            if w[1].start_day <= w[0].finish_day() {
                out.push(Violation::Overlap { a: w[0].bug, b: w[1].bug });
            }
        }
    }

    if rules.dependencies {
        for (i, b) in instance.bugs.iter().enumerate() {
            let Some(child) = seen.get(&b.id) else { continue };
            for &p in &b.open_parents {
                let parent = instance.bugs[p].id;
                match seen.get(&parent) {
                    None => out.push(Violation::ParentUnassigned { parent, child: b.id }),
                    Some(pa) if child.start_day <= pa.finish_day() => {
                        out.push(Violation::StartsBeforeParent { parent, child: b.id })
                    }
                    _ => {}
                }
            }
            for &(parent, tau) in &instance.bugs[i].ledger_parents {
                if child.start_day <= tau {
                    out.push(Violation::StartsBeforeLedgerParent { parent, child: b.id });
                }
            }
        }
    }
    out
}

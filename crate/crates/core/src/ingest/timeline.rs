use std::collections::BTreeMap;

use super::events::{EventKind, RawEvent};
use crate::model::{BugRecord, BugStatus};
use crate::BugId;

/// Folds an event stream into one record per reported bug.
///
/// The assignment kept is the last one on record, the fix day is the last
/// `fixed` event (so a reopened and re-fixed bug reports its final fix), and
/// dependency links are the set still present after all additions and
/// removals. Links to bugs that were never reported in the stream are
/// dropped.
pub fn build_records(events: &[RawEvent]) -> BTreeMap<BugId, BugRecord> {
    let mut records: BTreeMap<BugId, BugRecord> = BTreeMap::new();
    for e in events {
        if let EventKind::Reported { summary, description, component } = &e.kind {
            let r = records.entry(e.bug).or_insert_with(|| BugRecord::new(e.bug, e.day));
            r.summary = summary.clone();
            r.description = description.clone();
            r.component = component.clone();
            r.report_day = e.day;
        }
    }
    for e in events {
        if !records.contains_key(&e.bug) {
            continue;
        }
        match &e.kind {
            EventKind::Reported { .. } => {}
            EventKind::Assigned { developer } => {
                let r = records.get_mut(&e.bug).unwrap();
                r.actual_assignee = Some(developer.clone());
                r.actual_assign_day = Some(e.day);
                if r.status == BugStatus::Open {
                    r.status = BugStatus::Assigned;
                }
            }
            EventKind::Fixed => {
                let r = records.get_mut(&e.bug).unwrap();
                r.actual_fix_day = Some(e.day);
                r.status = BugStatus::Fixed;
            }
            EventKind::Reopened => {
                let r = records.get_mut(&e.bug).unwrap();
                r.status = if r.actual_assignee.is_some() { BugStatus::Assigned } else { BugStatus::Open };
            }
            EventKind::MetaFlagged => records.get_mut(&e.bug).unwrap().is_meta = true,
            EventKind::DependencyAdded { blocker } => {
                if *blocker != e.bug && records.contains_key(blocker) {
                    records.get_mut(&e.bug).unwrap().depends_on.insert(*blocker);
                    records.get_mut(blocker).unwrap().blocks.insert(e.bug);
                }
            }
            EventKind::DependencyRemoved { blocker } => {
                records.get_mut(&e.bug).unwrap().depends_on.remove(blocker);
                if let Some(b) = records.get_mut(blocker) {
                    b.blocks.remove(&e.bug);
                }
            }
        }
    }
    for r in records.values_mut() {
        if r.status != BugStatus::Fixed {
            r.actual_fix_day = None;
        }
        r.fixing_time_days = r.ground_truth_duration();
    }
    records
}

//! The five dataset-cleaning stages.
//!
//! Thresholds are derived once into a [`FilterPlan`] and then applied, so
//! filtering the output again with the same plan is a no-op.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::estimate::{self, EmptyHistory};
use super::events::RawEvent;
use super::timeline::build_records;
use crate::model::{BugRecord, BugStatus};
use crate::{BugId, DevId};

pub const STAGE_NAMES: [&str; 5] = ["meta", "resolution", "active_developer", "assignment_date", "fixing_time_outlier"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPlan {
    pub active_developers: BTreeSet<DevId>,
    /// Bugs whose fixing time exceeds this many days are dropped.
    pub outlier_threshold: f64,
}

/// Bug counts before filtering and after each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageCounts {
    pub raw: usize,
    pub after: [usize; 5],
}

impl StageCounts {
    pub fn is_nonincreasing(&self) -> bool {
        let mut prev = self.raw;
        self.after.iter().all(|&c| {
            let ok = c <= prev;
            prev = c;
            ok
        })
    }

    pub fn as_map(&self) -> BTreeMap<String, usize> {
        STAGE_NAMES.iter().enumerate().map(|(i, n)| (format!("{i}_{n}"), self.after[i])).collect()
    }
}

fn keep_resolution(b: &BugRecord) -> bool {
    b.status == BugStatus::Fixed && b.actual_fix_day.is_some_and(|f| f >= b.report_day)
}

fn keep_dates(b: &BugRecord) -> bool {
    match (b.actual_assign_day, b.actual_fix_day) {
        (Some(a), Some(f)) => a >= b.report_day && a <= f,
        _ => false,
    }
}

/// Runs the stages in order and returns the surviving bugs with the count
/// after each stage.
pub fn filter_records(records: &BTreeMap<BugId, BugRecord>, plan: &FilterPlan) -> (BTreeSet<BugId>, StageCounts) {
    let mut counts = StageCounts { raw: records.len(), ..Default::default() };
    let mut alive: Vec<&BugRecord> = records.values().collect();
    let stages: [&dyn Fn(&BugRecord) -> bool; 5] = [
        &|b| !b.is_meta,
        &keep_resolution,
        &|b| b.actual_assignee.as_ref().is_some_and(|d| plan.active_developers.contains(d)),
        &keep_dates,
        &|b| b.ground_truth_duration().is_some_and(|d| d as f64 <= plan.outlier_threshold),
    ];
    for (i, keep) in stages.iter().enumerate() {
        alive.retain(|b| keep(b));
        counts.after[i] = alive.len();
    }
    (alive.into_iter().map(|b| b.id).collect(), counts)
}

/// Derives the active-developer set and outlier cut-off from training
/// events. Developers are counted on bugs that pass the first two stages;
/// the cut-off is computed on bugs that pass the first four.
pub fn derive_plan(training: &[RawEvent]) -> Result<FilterPlan, EmptyHistory> {
    let records = build_records(training);
    let resolved: Vec<&BugRecord> = records.values().filter(|b| !b.is_meta && keep_resolution(b)).collect();
    let active = estimate::identify_active_developers(resolved.iter().copied())?;
    let times: Vec<f64> = resolved
        .iter()
        .filter(|b| b.actual_assignee.as_ref().is_some_and(|d| active.contains(d)) && keep_dates(b))
        .filter_map(|b| b.ground_truth_duration())
        .map(f64::from)
        .collect();
    let outlier_threshold = estimate::outlier_threshold(&times).ok_or(EmptyHistory)?;
    Ok(FilterPlan { active_developers: active, outlier_threshold })
}

/// Keeps the events of bugs that survive every stage.
pub fn apply_filters(events: &[RawEvent], plan: &FilterPlan) -> (Vec<RawEvent>, StageCounts) {
    let (keep, counts) = filter_records(&build_records(events), plan);
    debug_assert!(counts.is_nonincreasing());
    (events.iter().filter(|e| keep.contains(&e.bug)).cloned().collect(), counts)
}

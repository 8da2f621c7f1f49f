//! Developer-level estimates drawn from the training window.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::BugRecord;
use crate::quantile::Quartiles;
use crate::{Day, DevId};

#[derive(Debug, thiserror::Error)]
#[error("no fixed bugs with an assignee in the training window")]
pub struct EmptyHistory;

/// Number of fixed bugs credited to each developer.
pub fn fix_counts<'a>(bugs: impl IntoIterator<Item = &'a BugRecord>) -> BTreeMap<DevId, u32> {
    let mut counts = BTreeMap::new();
    for b in bugs {
        if let (Some(dev), Some(_)) = (&b.actual_assignee, b.actual_fix_day) {
            *counts.entry(dev.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Developers whose fix count is strictly greater than the interquartile
/// range of all developers' fix counts.
pub fn active_from_counts(counts: &BTreeMap<DevId, u32>) -> Result<BTreeSet<DevId>, EmptyHistory> {
    let values: Vec<f64> = counts.values().map(|&c| c as f64).collect();
    let iqr = Quartiles::of(&values).ok_or(EmptyHistory)?.iqr();
    Ok(counts.iter().filter(|(_, &c)| c as f64 > iqr).map(|(d, _)| d.clone()).collect())
}

pub fn identify_active_developers<'a>(bugs: impl IntoIterator<Item = &'a BugRecord>) -> Result<BTreeSet<DevId>, EmptyHistory> {
    active_from_counts(&fix_counts(bugs))
}

/// Per developer, the number of bugs in progress on each day of `window`
/// on which they had at least one. A bug is in progress from its assignment
/// day up to, not including, its fix day.
pub fn daily_simultaneous_counts<'a>(bugs: impl IntoIterator<Item = &'a BugRecord>, window: (Day, Day)) -> BTreeMap<DevId, Vec<u32>> {
    let mut per_day: BTreeMap<DevId, BTreeMap<Day, u32>> = BTreeMap::new();
    for b in bugs {
        let (Some(dev), Some(start), Some(end)) = (&b.actual_assignee, b.actual_assign_day, b.actual_fix_day) else {
            continue;
        };
        let days = per_day.entry(dev.clone()).or_default();
        for t in start.max(window.0)..end.min(window.1 + 1) {
            *days.entry(t).or_insert(0) += 1;
        }
    }
    per_day.into_iter().map(|(d, days)| (d, days.into_values().collect())).collect()
}

/// `max(1, floor(Q3 + 1.5 IQR))` of a developer's daily simultaneous-task
/// counts; 1 when there are none.
pub fn slot_count_from_daily(counts: &[u32]) -> usize {
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    match Quartiles::of(&values) {
        Some(q) => (q.upper_fence().floor() as usize).max(1),
        None => 1,
    }
}

pub fn estimate_slot_counts<'a>(
    bugs: impl IntoIterator<Item = &'a BugRecord>,
    window: (Day, Day),
    active: &BTreeSet<DevId>,
) -> BTreeMap<DevId, usize> {
    let daily = daily_simultaneous_counts(bugs, window);
    active
        .iter()
        .map(|d| (d.clone(), daily.get(d).map_or(1, |c| slot_count_from_daily(c))))
        .collect()
}

/// Components each developer fixed at least one bug in.
pub fn component_experience<'a>(bugs: impl IntoIterator<Item = &'a BugRecord>) -> BTreeMap<DevId, BTreeSet<String>> {
    let mut exp: BTreeMap<DevId, BTreeSet<String>> = BTreeMap::new();
    for b in bugs {
        if let (Some(dev), Some(_)) = (&b.actual_assignee, b.actual_fix_day) {
            exp.entry(dev.clone()).or_default().insert(b.component.clone());
        }
    }
    exp
}

/// Tukey upper fence of fixing times, used as the outlier cut-off.
pub fn outlier_threshold(fixing_days: &[f64]) -> Option<f64> {
    Quartiles::of(fixing_days).map(|q| q.upper_fence())
}

/// Planning horizon: the third quartile of fixing times, rounded up to a
/// whole day and at least 1.
pub fn auto_horizon(fixing_days: &[f64]) -> usize {
    Quartiles::of(fixing_days).map_or(1, |q| (q.q3.ceil() as usize).max(1))
}

//! Comparison metrics computed from a replay ledger, plus paired tests.

mod wilcoxon;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::quantile::{mean, std_dev};
use crate::sim::{BugOutcome, SimulationLedger};
use crate::strategies::Strategy;
use crate::DevId;

pub use wilcoxon::{exact_counts, wilcoxon_signed_rank, Alternative, WilcoxonError, WilcoxonResult, EXACT_LIMIT};

/// Components each developer fixed during training.
pub type Experience = BTreeMap<DevId, BTreeSet<String>>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std_dev: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        Spread { mean: mean(values), std_dev: std_dev(values) }
    }
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn assigned(ledger: &SimulationLedger) -> impl Iterator<Item = &BugOutcome> {
    ledger.bugs.values().filter(|b| !b.episodes.is_empty())
}

/// Share of assigned bugs whose assignee had fixed a bug of the same
/// component during training.
pub fn accuracy(ledger: &SimulationLedger, experience: &Experience) -> f64 {
    let (mut hit, mut all) = (0, 0);
    for b in assigned(ledger) {
        all += 1;
        let dev = &b.last().expect("assigned").developer;
        if experience.get(dev).is_some_and(|c| c.contains(&b.component)) {
            hit += 1;
        }
    }
    pct(hit, all)
}

/// Share of assigned bugs finished more than `horizon` days after their
/// report.
pub fn overdue(ledger: &SimulationLedger, horizon: usize) -> f64 {
    let (mut late, mut all) = (0, 0);
    for b in assigned(ledger) {
        all += 1;
        let report = b.report_day.expect("assigned bugs were reported");
        if b.last().expect("assigned").completion_day - report > horizon as i64 {
            late += 1;
        }
    }
    pct(late, all)
}

/// Share of assignments that start before one of the bug's blockers is
/// finished. Blockers are those known at assignment time or reported while
/// the bug was being worked on.
pub fn infeasible_dependency(ledger: &SimulationLedger) -> f64 {
    let (mut bad, mut all) = (0, 0);
    for b in ledger.bugs.values() {
        for e in &b.episodes {
            all += 1;
            let broken = e.blockers.iter().any(|p| match ledger.bugs.get(p) {
                Some(parent) => !parent.episodes.iter().any(|pe| pe.completion_day < e.start_day),
                None => false,
            });
            if broken {
                bad += 1;
            }
        }
    }
    pct(bad, all)
}

/// Share of developers busy on each day.
pub fn utilization_daily(ledger: &SimulationLedger) -> Vec<f64> {
    let n = ledger.developers.len().max(1) as f64;
    ledger.days.iter().map(|d| d.busy_slots.iter().filter(|&&k| k > 0).count() as f64 / n).collect()
}

/// Share of planned slots in use on each day. Slots beyond a developer's
/// planned count do not add capacity, so the value never exceeds 1.
pub fn utilization_slots(ledger: &SimulationLedger) -> Vec<f64> {
    let capacity: usize = ledger.developers.iter().map(|d| d.slot_count).sum();
    ledger
        .days
        .iter()
        .map(|d| {
            let used: usize = d.busy_slots.iter().zip(&ledger.developers).map(|(&k, s)| k.min(s.slot_count)).sum();
            used as f64 / capacity.max(1) as f64
        })
        .collect()
}

/// Averages over consecutive 7-day blocks; a trailing partial week is kept.
pub fn weekly_means(series: &[f64]) -> Vec<f64> {
    series.chunks(7).map(mean).collect()
}

/// Day gaps between simulated and recorded assignment, and the number of
/// assigned bugs that had no record.
pub fn divergence(ledger: &SimulationLedger) -> (Spread, usize) {
    let mut gaps = Vec::new();
    let mut skipped = 0;
    for b in assigned(ledger) {
        match &b.recorded {
            Some(r) => gaps.push((b.last().expect("assigned").start_day - r.assign_day).abs() as f64),
            None => skipped += 1,
        }
    }
    (Spread::of(&gaps), skipped)
}

/// Assigned bugs per developer, in ledger developer order.
pub fn developer_loads(ledger: &SimulationLedger) -> Vec<usize> {
    let mut counts: BTreeMap<&DevId, usize> = ledger.developers.iter().map(|d| (&d.id, 0)).collect();
    for b in assigned(ledger) {
        *counts.entry(&b.last().expect("assigned").developer).or_default() += 1;
    }
    ledger.developers.iter().map(|d| counts[&d.id]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub project: String,
    pub strategy: Strategy,
    pub alpha: f64,
    pub horizon: usize,
    pub assigned_count: usize,
    pub unassigned_count: usize,
    pub developers_used: usize,
    pub task_distribution: Spread,
    pub max_developer_load: usize,
    pub mean_fixing_days: f64,
    pub overdue_pct: f64,
    pub accuracy_pct: f64,
    pub infeasible_dependency_pct: f64,
    pub mean_bdg_depth: f64,
    pub mean_bdg_degree: f64,
    pub assignment_divergence: Spread,
    pub divergence_skipped: usize,
    /// Mean over days of the share of developers busy.
    pub daily_developer_utilization: f64,
    pub developer_utilization_series: Vec<f64>,
    pub slot_utilization_series: Vec<f64>,
    pub weekly_slot_utilization: Vec<f64>,
    pub daily_assigned: Vec<f64>,
    pub run_wall_time: f64,
}

impl MetricsReport {
    /// Every metric of one replay. `run_wall_time` is left at zero for the
    /// caller to fill.
    pub fn compute(project: &str, ledger: &SimulationLedger, experience: &Experience) -> Self {
        let loads = developer_loads(ledger);
        let assigned_count = assigned(ledger).count();
        let fixing: Vec<f64> = assigned(ledger).map(|b| b.last().expect("assigned").duration as f64).collect();
        let (div, skipped) = divergence(ledger);
        let dev_util = utilization_daily(ledger);
        let slot_util = utilization_slots(ledger);
        let depths: Vec<f64> = ledger.days.iter().map(|d| d.graph.mean_depth).collect();
        let degrees: Vec<f64> = ledger.days.iter().map(|d| d.graph.mean_degree).collect();
        MetricsReport {
            project: project.to_string(),
            strategy: ledger.strategy,
            alpha: ledger.alpha,
            horizon: ledger.horizon,
            assigned_count,
            unassigned_count: ledger.bugs.len() - assigned_count,
            developers_used: loads.iter().filter(|&&k| k > 0).count(),
            task_distribution: Spread::of(&loads.iter().map(|&k| k as f64).collect::<Vec<_>>()),
            max_developer_load: loads.iter().copied().max().unwrap_or(0),
            mean_fixing_days: mean(&fixing),
            overdue_pct: overdue(ledger, ledger.horizon),
            accuracy_pct: accuracy(ledger, experience),
            infeasible_dependency_pct: infeasible_dependency(ledger),
            mean_bdg_depth: mean(&depths),
            mean_bdg_degree: mean(&degrees),
            assignment_divergence: div,
            divergence_skipped: skipped,
            daily_developer_utilization: mean(&dev_util),
            developer_utilization_series: dev_util,
            weekly_slot_utilization: weekly_means(&slot_util),
            slot_utilization_series: slot_util,
            daily_assigned: ledger.days.iter().map(|d| d.assigned.len() as f64).collect(),
            run_wall_time: 0.0,
        }
    }

    fn row(&self) -> ReportRow<'_> {
        ReportRow {
            project: &self.project,
            strategy: self.strategy.name(),
            alpha: self.alpha,
            horizon: self.horizon,
            assigned: self.assigned_count,
            unassigned: self.unassigned_count,
            developers_used: self.developers_used,
            task_mean: self.task_distribution.mean,
            task_std: self.task_distribution.std_dev,
            max_developer_load: self.max_developer_load,
            mean_fixing_days: self.mean_fixing_days,
            overdue_pct: self.overdue_pct,
            accuracy_pct: self.accuracy_pct,
            infeasible_dependency_pct: self.infeasible_dependency_pct,
            mean_bdg_depth: self.mean_bdg_depth,
            mean_bdg_degree: self.mean_bdg_degree,
            divergence_mean: self.assignment_divergence.mean,
            divergence_std: self.assignment_divergence.std_dev,
            developer_utilization: self.daily_developer_utilization,
            slot_utilization: mean(&self.slot_utilization_series),
            wall_time_s: self.run_wall_time,
        }
    }
}

#[derive(Serialize)]
struct ReportRow<'a> {
    project: &'a str,
    strategy: &'a str,
    alpha: f64,
    horizon: usize,
    assigned: usize,
    unassigned: usize,
    developers_used: usize,
    task_mean: f64,
    task_std: f64,
    max_developer_load: usize,
    mean_fixing_days: f64,
    overdue_pct: f64,
    accuracy_pct: f64,
    infeasible_dependency_pct: f64,
    mean_bdg_depth: f64,
    mean_bdg_degree: f64,
    divergence_mean: f64,
    divergence_std: f64,
    developer_utilization: f64,
    slot_utilization: f64,
    wall_time_s: f64,
}

/// Writes one CSV row per report, with a header.
pub fn write_reports_csv<W: Write>(out: W, reports: &[MetricsReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

/// One paired comparison between two replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub first: Strategy,
    pub second: Strategy,
    pub series: String,
    pub alternative: Alternative,
    /// `None` when every paired difference is zero.
    pub result: Option<WilcoxonResult>,
}

/// Tests whether `first` has greater weekly slot utilization and more
/// daily assignments than `second`.
pub fn compare_pair(first: &MetricsReport, second: &MetricsReport) -> Vec<PairedComparison> {
    let series: [(&str, &[f64], &[f64]); 2] = [
        ("weekly_slot_utilization", &first.weekly_slot_utilization, &second.weekly_slot_utilization),
        ("daily_assigned", &first.daily_assigned, &second.daily_assigned),
    ];
    series
        .into_iter()
        .map(|(name, a, b)| {
            let n = a.len().min(b.len());
            PairedComparison {
                first: first.strategy,
                second: second.strategy,
                series: name.to_string(),
                alternative: Alternative::Greater,
                result: wilcoxon_signed_rank(&a[..n], &b[..n], Alternative::Greater).ok(),
            }
        })
        .collect()
}

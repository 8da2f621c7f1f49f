use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::PlanStatus;
use crate::strategies::Strategy;
use crate::{BugId, Day, DevId};

use super::DeveloperSetup;

/// One committed assignment, in absolute days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub developer: DevId,
    pub slot: usize,
    /// Day the decision was made.
    pub decided_day: Day,
    pub start_day: Day,
    pub completion_day: Day,
    pub duration: u32,
    /// Blockers known when the bug was assigned plus those reported while
    /// it was being worked on.
    pub blockers: Vec<BugId>,
}

/// What history recorded for a bug.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedOutcome {
    pub developer: DevId,
    pub assign_day: Day,
    pub fix_day: Day,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugOutcome {
    pub bug: BugId,
    pub report_day: Option<Day>,
    pub component: String,
    pub episodes: Vec<Episode>,
    pub recorded: Option<RecordedOutcome>,
    pub excluded: bool,
}

impl BugOutcome {
    /// The most recent assignment.
    pub fn last(&self) -> Option<&Episode> {
        self.episodes.last()
    }
}

/// Per-state bug counts; they always add up to the number of simulated bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub in_progress: usize,
    pub deferred: usize,
    pub not_reported: usize,
    pub completed: usize,
    pub excluded: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.in_progress + self.deferred + self.not_reported + self.completed + self.excluded
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub nodes: usize,
    pub arcs: usize,
    pub mean_degree: f64,
    pub mean_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayAssignment {
    pub bug: BugId,
    pub developer: DevId,
    pub slot: usize,
    pub start_day: Day,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLedgerDay {
    pub day: Day,
    pub assigned: Vec<DayAssignment>,
    pub completed: Vec<BugId>,
    /// Feasible bugs left unassigned by today's plan.
    pub deferred_count: usize,
    /// Feasible bugs offered to today's plan.
    pub open_bug_count: usize,
    /// Slots in use today per developer, in developer order. Historical
    /// replays may exceed the planned slot count.
    pub busy_slots: Vec<usize>,
    pub graph: GraphSnapshot,
    pub census: Census,
    pub solver_status: Option<PlanStatus>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLedger {
    pub strategy: Strategy,
    pub alpha: f64,
    pub horizon: usize,
    pub window: (Day, Day),
    pub developers: Vec<DeveloperSetup>,
    pub days: Vec<SimulationLedgerDay>,
    pub bugs: BTreeMap<BugId, BugOutcome>,
    /// Dependency arcs refused because they would close a cycle.
    pub rejected_arcs: usize,
}

#[derive(Serialize)]
struct DayRow {
    day: Day,
    assigned: usize,
    completed: usize,
    deferred: usize,
    open: usize,
    busy_developers: usize,
    busy_slots: usize,
    in_progress: usize,
    not_reported: usize,
    completed_total: usize,
    excluded: usize,
    graph_nodes: usize,
    graph_arcs: usize,
    mean_degree: f64,
    mean_depth: f64,
}

impl SimulationLedger {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One CSV row per simulated day.
    pub fn write_daily_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for d in &self.days {
            w.serialize(DayRow {
                day: d.day,
                assigned: d.assigned.len(),
                completed: d.completed.len(),
                deferred: d.deferred_count,
                open: d.open_bug_count,
                busy_developers: d.busy_slots.iter().filter(|&&n| n > 0).count(),
                busy_slots: d.busy_slots.iter().sum(),
                in_progress: d.census.in_progress,
                not_reported: d.census.not_reported,
                completed_total: d.census.completed,
                excluded: d.census.excluded,
                graph_nodes: d.graph.nodes,
                graph_arcs: d.graph.arcs,
                mean_degree: d.graph.mean_degree,
                mean_depth: d.graph.mean_depth,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Checks that no slot hosts two bugs on one day over the whole run.
    pub fn slots_are_disjoint(&self) -> bool {
        let mut by_slot: BTreeMap<(&DevId, usize), Vec<(Day, Day)>> = BTreeMap::new();
        for e in self.bugs.values().flat_map(|b| &b.episodes) {
            by_slot.entry((&e.developer, e.slot)).or_default().push((e.start_day, e.completion_day));
        }
        by_slot.values_mut().all(|v| {
            v.sort();
            v.windows(2).all(|w| w[1].0 > w[0].1)
        })
    }
}

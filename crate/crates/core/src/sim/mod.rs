//! Day-by-day replay of an issue tracker under a triage strategy.
//!
//! Each simulated day the loop applies that day's events, offers every
//! open unassigned bug to the strategy, commits the resulting plan into the
//! developers' calendars and the ledger of assigned bugs, then advances the
//! calendars by one day and releases the bugs whose work ended.

mod ledger;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::OffDay;
use crate::ilp::SolveOptions;
use crate::ingest::{build_records, EventKind, RawEvent};
use crate::model::{AssignedBugLedger, Calendar, DependencyGraph, LedgerEntry, TriagePlan};
use crate::strategies::{self, GroundTruth, InstanceBug, InstanceDeveloper, Strategy, StrategyError, TriageInstance};
use crate::{BugId, Day, DevId};

pub use ledger::{BugOutcome, Census, DayAssignment, Episode, GraphSnapshot, RecordedOutcome, SimulationLedger, SimulationLedgerDay};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeveloperSetup {
    pub id: DevId,
    pub slot_count: usize,
}

/// Predicted suitability and whole-day cost of one bug for every developer,
/// in developer order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugForecast {
    pub component: String,
    pub suitability: Vec<f64>,
    pub cost: Vec<u32>,
}

/// Everything a replay needs besides the run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub developers: Vec<DeveloperSetup>,
    pub forecasts: BTreeMap<BugId, BugForecast>,
    /// Events of the test window, sorted by day.
    pub events: Vec<RawEvent>,
    pub window: (Day, Day),
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub strategy: Strategy,
    pub alpha: f64,
    pub horizon: usize,
    pub solver: SolveOptions,
    pub off_days: Vec<OffDay>,
    /// Re-check every plan with the independent validator.
    pub validate: bool,
}

impl SimulationConfig {
    pub fn new(strategy: Strategy, alpha: f64, horizon: usize) -> Self {
        SimulationConfig { strategy, alpha, horizon, solver: SolveOptions::default(), off_days: Vec::new(), validate: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("alpha must lie in [0, 1] and the horizon must be at least 1 day")]
    Config,
    #[error("scenario has no developers")]
    NoDevelopers,
    #[error("bug {bug}: forecast does not cover every developer")]
    Forecast { bug: BugId },
    #[error("day {day}")]
    Strategy { day: Day, source: StrategyError },
    #[error("day {day}: plan breaks {} rule(s), first: {}", violations.len(), violations[0])]
    Validation { day: Day, violations: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    NotReported,
    Open,
    InProgress,
    Completed,
    Excluded,
}

/// Mutable replay state.
pub struct SimState {
    pub day: Day,
    horizon: usize,
    developers: Vec<DeveloperSetup>,
    off_days: Vec<OffDay>,
    pub calendars: Vec<Calendar>,
    pub ledger: AssignedBugLedger,
    pub graph: DependencyGraph,
    phase: BTreeMap<BugId, Phase>,
    pending_arcs: BTreeSet<(BugId, BugId)>,
    outcomes: BTreeMap<BugId, BugOutcome>,
    rejected_arcs: usize,
}

impl SimState {
    pub fn new(scenario: &Scenario, horizon: usize, off_days: Vec<OffDay>) -> Self {
        let start = scenario.window.0;
        let records = build_records(&scenario.events);
        let outcomes = scenario
            .forecasts
            .iter()
            .map(|(&bug, f)| {
                let recorded = records.get(&bug).and_then(|r| match (&r.actual_assignee, r.actual_assign_day, r.actual_fix_day) {
                    (Some(d), Some(a), Some(f)) if f >= a => Some(RecordedOutcome { developer: d.clone(), assign_day: a, fix_day: f }),
                    _ => None,
                });
                let outcome =
                    BugOutcome { bug, report_day: None, component: f.component.clone(), episodes: Vec::new(), recorded, excluded: false };
                (bug, outcome)
            })
            .collect();
        let mut state = SimState {
            day: start,
            horizon,
            developers: scenario.developers.clone(),
            off_days,
            calendars: Vec::new(),
            ledger: AssignedBugLedger::new(),
            graph: DependencyGraph::new(),
            phase: scenario.forecasts.keys().map(|&b| (b, Phase::NotReported)).collect(),
            pending_arcs: BTreeSet::new(),
            outcomes,
            rejected_arcs: 0,
        };
        state.calendars = (0..state.developers.len())
            .map(|d| {
                let rows = (0..state.developers[d].slot_count)
                    .map(|_| (0..horizon).map(|t| !state.is_off(d, start + t as Day)).collect())
                    .collect();
                Calendar::from_rows(rows)
            })
            .collect();
        state
    }

    fn is_off(&self, d: usize, day: Day) -> bool {
        let id = &self.developers[d].id;
        self.off_days.iter().any(|o| o.day == day && o.developer.as_ref().is_none_or(|x| x == id))
    }

    fn in_scope(&self, bug: BugId) -> bool {
        self.phase.contains_key(&bug)
    }

    fn connect(&mut self, blocker: BugId, blocked: BugId, day: Day) {
        match self.graph.add_dependency(blocker, blocked, day) {
            Ok(_) => {}
            Err(e) => {
                log::debug!("day {day}: dependency {blocker} -> {blocked} refused: {e}");
                self.rejected_arcs += 1;
            }
        }
    }

    /// Applies one event of the current day.
    pub fn apply(&mut self, event: &RawEvent) {
        let bug = event.bug;
        let Some(&phase) = self.phase.get(&bug) else { return };
        let day = event.day;
        match &event.kind {
            EventKind::Reported { .. } if phase == Phase::NotReported => {
                self.phase.insert(bug, Phase::Open);
                self.outcomes.get_mut(&bug).expect("tracked").report_day = Some(day);
                self.graph.add_node(bug);
                let ready: Vec<(BugId, BugId)> =
                    self.pending_arcs.iter().filter(|&&(p, c)| self.graph.contains(p) && self.graph.contains(c)).copied().collect();
                for (p, c) in ready {
                    self.pending_arcs.remove(&(p, c));
                    self.connect(p, c, day);
                }
            }
            EventKind::DependencyAdded { blocker } if self.in_scope(*blocker) && *blocker != bug => {
                if phase == Phase::InProgress {
                    let ep = self.outcomes.get_mut(&bug).and_then(|o| o.episodes.last_mut()).expect("in-progress bug has an episode");
                    if !ep.blockers.contains(blocker) {
                        ep.blockers.push(*blocker);
                    }
                }
                if self.graph.contains(*blocker) && self.graph.contains(bug) {
                    self.connect(*blocker, bug, day);
                } else if self.phase[blocker] == Phase::NotReported || phase == Phase::NotReported {
                    self.pending_arcs.insert((*blocker, bug));
                }
            }
            EventKind::DependencyRemoved { blocker } => {
                self.pending_arcs.remove(&(*blocker, bug));
                self.graph.remove_dependency(*blocker, bug, day);
            }
            EventKind::Reopened if phase == Phase::Completed => {
                self.phase.insert(bug, Phase::Open);
                self.graph.add_node(bug);
            }
            EventKind::MetaFlagged if matches!(phase, Phase::NotReported | Phase::Open) => {
                self.phase.insert(bug, Phase::Excluded);
                self.outcomes.get_mut(&bug).expect("tracked").excluded = true;
                self.graph.remove_node(bug);
            }
            _ => {}
        }
    }

    /// Open, unassigned, in-scope bugs reported by today, in id order.
    pub fn feasible_bugs(&self) -> Vec<BugId> {
        self.phase.iter().filter(|(_, &p)| p == Phase::Open).map(|(&b, _)| b).collect()
    }

    /// Builds today's instance over the feasible bugs.
    pub fn instance(&self, scenario: &Scenario, alpha: f64) -> TriageInstance {
        let feasible = self.feasible_bugs();
        let index: BTreeMap<BugId, usize> = feasible.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let day = self.day;
        let developers = self
            .developers
            .iter()
            .zip(&self.calendars)
            .map(|(setup, cal)| {
                let mut busy_until = vec![0; cal.slots()];
                for (_, e) in self.ledger.iter().filter(|(_, e)| e.developer == setup.id) {
                    let rel = (e.completion_day - day + 1).max(0) as usize;
                    if e.slot < busy_until.len() {
                        busy_until[e.slot] = busy_until[e.slot].max(rel);
                    }
                }
                InstanceDeveloper { id: setup.id.clone(), slot_count: setup.slot_count, calendar: cal.clone(), busy_until }
            })
            .collect();
        let bugs = feasible
            .iter()
            .map(|&b| {
                let f = &scenario.forecasts[&b];
                let mut open_parents = Vec::new();
                let mut ledger_parents = Vec::new();
                for p in self.graph.parents(b) {
                    if let Some(&i) = index.get(&p) {
                        open_parents.push(i);
                    } else if let Some(e) = self.ledger.get(p) {
                        ledger_parents.push((p, (e.completion_day - day + 1).max(0) as usize));
                    }
                }
                let outcome = &self.outcomes[&b];
                let ground_truth = outcome.recorded.as_ref().map(|r| GroundTruth {
                    developer: r.developer.clone(),
                    assign_day: r.assign_day,
                    duration: (r.fix_day - r.assign_day + 1) as u32,
                });
                InstanceBug { id: b, suitability: f.suitability.clone(), cost: f.cost.clone(), open_parents, ledger_parents, ground_truth }
            })
            .collect();
        TriageInstance { day, horizon: self.horizon, alpha, developers, bugs }
    }

    /// Writes a plan into the calendars, the ledger and the bug outcomes.
    pub fn commit(&mut self, plan: &TriagePlan) -> Vec<DayAssignment> {
        let day = self.day;
        let mut out = Vec::new();
        for a in &plan.assignments {
            let d = self.developers.iter().position(|s| s.id == a.developer).expect("plan uses known developers");
            while a.slot >= self.calendars[d].slots() {
                let row = (1..=self.horizon).map(|t| !self.is_off(d, day + t as Day - 1)).collect();
                self.calendars[d].push_slot(row);
            }
            let cal = &mut self.calendars[d];
            for u in a.start_day..=a.finish_day().min(self.horizon) {
                cal.set(a.slot, u, false);
            }
            let start = day + a.start_day as Day - 1;
            let entry = LedgerEntry::new(a.developer.clone(), a.slot, start, a.duration);
            let completion_day = entry.completion_day;
            self.ledger.insert(a.bug, entry).expect("validated plans never overlap the ledger");
            let blockers = self.graph.parents(a.bug).collect();
            self.phase.insert(a.bug, Phase::InProgress);
            self.outcomes.get_mut(&a.bug).expect("tracked").episodes.push(Episode {
                developer: a.developer.clone(),
                slot: a.slot,
                decided_day: day,
                start_day: start,
                completion_day,
                duration: a.duration,
                blockers,
            });
            out.push(DayAssignment { bug: a.bug, developer: a.developer.clone(), slot: a.slot, start_day: start, duration: a.duration });
        }
        out
    }

    /// Slots in use today per developer.
    pub fn busy_slots(&self) -> Vec<usize> {
        self.developers
            .iter()
            .map(|s| self.ledger.iter().filter(|(_, e)| e.developer == s.id && e.occupies(self.day)).count())
            .collect()
    }

    /// Ends the current day: releases finished bugs and rolls every
    /// calendar forward one day. Returns the bugs finished today.
    pub fn advance_day(&mut self) -> Vec<BugId> {
        let today = self.day;
        let done = self.ledger.completing_on(today);
        for &b in &done {
            self.ledger.remove(b);
            self.phase.insert(b, Phase::Completed);
            self.graph.remove_node(b);
        }
        let new_day = today + self.horizon as Day;
        for d in 0..self.calendars.len() {
            let off = self.is_off(d, new_day);
            let id = self.developers[d].id.clone();
            let appended: Vec<bool> = (0..self.calendars[d].slots())
                .map(|j| !off && !self.ledger.iter().any(|(_, e)| e.developer == id && e.slot == j && e.occupies(new_day)))
                .collect();
            self.calendars[d].shift(&appended);
        }
        self.day += 1;
        done
    }

    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for p in self.phase.values() {
            match p {
                Phase::NotReported => c.not_reported += 1,
                Phase::Open => c.deferred += 1,
                Phase::InProgress => c.in_progress += 1,
                Phase::Completed => c.completed += 1,
                Phase::Excluded => c.excluded += 1,
            }
        }
        c
    }

    fn snapshot(&self) -> GraphSnapshot {
        GraphSnapshot {
            nodes: self.graph.node_count(),
            arcs: self.graph.arc_count(),
            mean_degree: self.graph.mean_degree(),
            mean_depth: self.graph.mean_depth(),
        }
    }
}

/// Replays the scenario's window under one strategy.
pub fn run(config: &SimulationConfig, scenario: &Scenario) -> Result<SimulationLedger, SimError> {
    run_observed(config, scenario, |_| {})
}

/// Like [`run`], calling `observe` with every day's instance before it is
/// planned.
pub fn run_observed(
    config: &SimulationConfig,
    scenario: &Scenario,
    mut observe: impl FnMut(&TriageInstance),
) -> Result<SimulationLedger, SimError> {
    if !(0.0..=1.0).contains(&config.alpha) || config.horizon == 0 {
        return Err(SimError::Config);
    }
    if scenario.developers.is_empty() {
        return Err(SimError::NoDevelopers);
    }
    let n = scenario.developers.len();
    if let Some((&bug, _)) = scenario.forecasts.iter().find(|(_, f)| f.suitability.len() != n || f.cost.len() != n) {
        return Err(SimError::Forecast { bug });
    }
    let mut state = SimState::new(scenario, config.horizon, config.off_days.clone());
    let mut events = scenario.events.iter().filter(|e| e.day >= scenario.window.0 && e.day <= scenario.window.1).peekable();
    let mut days = Vec::new();
    for day in scenario.window.0..=scenario.window.1 {
        debug_assert_eq!(state.day, day);
        while let Some(e) = events.next_if(|e| e.day <= day) {
            state.apply(e);
        }
        let instance = state.instance(scenario, config.alpha);
        observe(&instance);
        let plan = strategies::plan(config.strategy, &instance, &config.solver).map_err(|source| SimError::Strategy { day, source })?;
        if config.validate {
            let violations = strategies::validate_plan(&instance, &plan, config.strategy.rules());
            if !violations.is_empty() {
                return Err(SimError::Validation { day, violations: violations.iter().map(|v| v.to_string()).collect() });
            }
        }
        let assigned = state.commit(&plan);
        let busy_slots = state.busy_slots();
        let graph = state.snapshot();
        let completed = state.advance_day();
        days.push(SimulationLedgerDay {
            day,
            deferred_count: instance.bugs.len() - assigned.len(),
            open_bug_count: instance.bugs.len(),
            assigned,
            completed,
            busy_slots,
            graph,
            census: state.census(),
            solver_status: config.strategy.uses_solver().then_some(plan.solver_status),
            objective: plan.objective_value,
        });
    }
    Ok(SimulationLedger {
        strategy: config.strategy,
        alpha: config.alpha,
        horizon: config.horizon,
        window: scenario.window,
        developers: scenario.developers.clone(),
        days,
        bugs: state.outcomes,
        rejected_arcs: state.rejected_arcs,
    })
}

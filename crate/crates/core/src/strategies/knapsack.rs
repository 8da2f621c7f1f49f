//! Models over `x[i, d]` with a scalar time budget per developer: the
//! dependency-aware one and the suitability-only multiple knapsack.
//!
//! Each developer's budget is the free time of their roomiest slot in the
//! horizon, and the bugs they win are queued into that slot cheapest first
//! (blockers before the bugs they block).

use crate::ilp::{BinaryProgram, Comparator};
use crate::model::{PlanStatus, PlannedAssignment, TriagePlan};

use super::board::Board;
use super::instance::TriageInstance;

#[derive(Debug, Clone)]
pub struct KnapsackProgram {
    pub program: BinaryProgram,
    /// `(bug, developer)` per variable.
    pub vars: Vec<(usize, usize)>,
    pub budgets: Vec<usize>,
}

/// Free days of each developer's roomiest slot.
pub fn budgets(instance: &TriageInstance) -> Vec<usize> {
    instance.developers.iter().map(|d| (0..d.slot_count).map(|j| d.calendar.free_days(j)).max().unwrap_or(0)).collect()
}

fn build(instance: &TriageInstance, with_dependencies: bool) -> KnapsackProgram {
    let budgets = budgets(instance);
    let mut program = BinaryProgram::new();
    let mut vars = Vec::new();
    let mut index = vec![vec![None; instance.developers.len()]; instance.bugs.len()];
    for (i, bug) in instance.bugs.iter().enumerate() {
        for (d, dev) in instance.developers.iter().enumerate() {
            if bug.cost[d] as usize > budgets[d] {
                continue;
            }
            let obj = if with_dependencies { instance.coefficient(i, d) } else { instance.relative_suitability(i, d) };
            index[i][d] = Some(program.add_var(format!("x[{},{}]", bug.id, dev.id), obj));
            vars.push((i, d));
        }
    }
    if with_dependencies {
        for (i, bug) in instance.bugs.iter().enumerate() {
            for &p in &bug.open_parents {
                for (d, var) in index[i].iter().enumerate() {
                    if let Some(vi) = *var {
                        let mut terms = vec![(vi, 1.0)];
                        if let Some(vp) = index[p][d] {
                            terms.push((vp, -1.0));
                        }
                        program.add_constraint(format!("prec[{},{},{}]", instance.bugs[p].id, bug.id, instance.developers[d].id), terms, Comparator::Le, 0.0);
                    }
                }
            }
        }
    }
    for (d, dev) in instance.developers.iter().enumerate() {
        let terms: Vec<(usize, f64)> =
            (0..instance.bugs.len()).filter_map(|i| index[i][d].map(|v| (v, instance.bugs[i].cost[d] as f64))).collect();
        if terms.len() > 1 {
            program.add_constraint(format!("budget[{}]", dev.id), terms, Comparator::Le, budgets[d] as f64);
        }
    }
    for (i, bug) in instance.bugs.iter().enumerate() {
        let terms: Vec<(usize, f64)> = index[i].iter().flatten().map(|&v| (v, 1.0)).collect();
        if terms.len() > 1 {
            program.add_constraint(format!("single[{}]", bug.id), terms, Comparator::Le, 1.0);
        }
    }
    KnapsackProgram { program, vars, budgets }
}

pub fn build_dabt(instance: &TriageInstance) -> KnapsackProgram {
    build(instance, true)
}

pub fn build_rabt(instance: &TriageInstance) -> KnapsackProgram {
    build(instance, false)
}

/// Orders one developer's bugs by ascending cost while keeping every
/// blocker ahead of the bugs it blocks.
fn post_order(instance: &TriageInstance, d: usize, mut bugs: Vec<usize>) -> Vec<usize> {
    bugs.sort_by_key(|&i| (instance.bugs[i].cost[d], i));
    let mut placed: Vec<usize> = Vec::with_capacity(bugs.len());
    while !bugs.is_empty() {
        let pos = bugs
            .iter()
            .position(|&i| instance.bugs[i].open_parents.iter().all(|p| !bugs.contains(p)))
            .unwrap_or(0);
        placed.push(bugs.remove(pos));
    }
    placed
}

impl KnapsackProgram {
    pub fn decode(&self, instance: &TriageInstance, assignment: &[bool], status: PlanStatus) -> TriagePlan {
        let mut board = Board::new(instance);
        let mut per_dev: Vec<Vec<usize>> = vec![Vec::new(); instance.developers.len()];
        for (v, &(i, d)) in self.vars.iter().enumerate() {
            if assignment[v] {
                per_dev[d].push(i);
            }
        }
        let mut assigned = vec![false; instance.bugs.len()];
        let mut assignments = Vec::new();
        for (d, bugs) in per_dev.into_iter().enumerate() {
            let slot = board.roomiest_slot(d, instance.developers[d].slot_count);
            let mut cursor = 1;
            for i in post_order(instance, d, bugs) {
                let len = instance.bugs[i].cost[d] as usize;
                let t = board.earliest_start(d, slot, cursor, len);
                board.claim(d, slot, t, len);
                cursor = t + len;
                assigned[i] = true;
                assignments.push(PlannedAssignment {
                    bug: instance.bugs[i].id,
                    developer: instance.developers[d].id.clone(),
                    slot,
                    start_day: t,
                    duration: len as u32,
                });
            }
        }
        assignments.sort_by_key(|a| (a.start_day, a.bug));
        let deferred = instance.bugs.iter().zip(&assigned).filter(|(_, a)| !**a).map(|(b, _)| b.id).collect();
        TriagePlan { assignments, deferred, objective_value: self.program.objective_value(assignment), solver_status: status }
    }
}

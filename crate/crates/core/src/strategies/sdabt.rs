//! The schedule- and dependency-aware model over `x[i, d, j, t]`.

use crate::ilp::{BinaryProgram, Comparator};
use crate::model::{PlanStatus, PlannedAssignment, TriagePlan};

use super::instance::TriageInstance;

/// How the availability and horizon restrictions enter the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compilation {
    /// Variables that would break them are never created, and start days
    /// before an assigned blocker finishes are skipped.
    Eliminated,
    /// Every `(i, d, j, t)` with `t <= L` gets a variable and the
    /// restrictions are written as rows.
    Explicit,
}

/// Key of one decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarKey {
    pub bug: usize,
    pub developer: usize,
    pub slot: usize,
    pub start: usize,
}

#[derive(Debug, Clone)]
pub struct SdabtProgram {
    pub program: BinaryProgram,
    pub vars: Vec<VarKey>,
    pub big_m: f64,
}

fn feasible_start(instance: &TriageInstance, i: usize, d: usize, j: usize, t: usize) -> bool {
    let c = instance.bugs[i].cost[d] as usize;
    t >= instance.bugs[i].earliest_start() && instance.developers[d].calendar.run_free(j, t, c)
}

/// Builds the program. Variables are declared bug by bug, then by start
/// day, slot and developer, so the solver's lexicographic tie-break prefers
/// earlier starts, then lower slots, then earlier developers.
pub fn build_sdabt(instance: &TriageInstance, compilation: Compilation) -> SdabtProgram {
    let horizon = instance.horizon;
    let big_m = horizon as f64 + 1.0;
    let mut program = BinaryProgram::new();
    let mut vars = Vec::new();
    let mut by_bug: Vec<Vec<usize>> = vec![Vec::new(); instance.bugs.len()];
    let max_slots = instance.developers.iter().map(|d| d.slot_count).max().unwrap_or(0);

    for (i, bug) in instance.bugs.iter().enumerate() {
        for t in 1..=horizon {
            for j in 0..max_slots {
                for (d, dev) in instance.developers.iter().enumerate() {
                    if j >= dev.slot_count {
                        continue;
                    }
                    if compilation == Compilation::Eliminated && !feasible_start(instance, i, d, j, t) {
                        continue;
                    }
                    let v = program.add_var(format!("x[{},{},{},{}]", bug.id, dev.id, j, t), instance.coefficient(i, d));
                    vars.push(VarKey { bug: i, developer: d, slot: j, start: t });
                    by_bug[i].push(v);
                }
            }
        }
    }

    for (i, vs) in by_bug.iter().enumerate() {
        if vs.len() > 1 {
            program.add_constraint(format!("single[{}]", instance.bugs[i].id), vs.iter().map(|&v| (v, 1.0)).collect(), Comparator::Le, 1.0);
        }
    }

    if compilation == Compilation::Explicit {
        for (v, k) in vars.iter().enumerate() {
            let c = instance.bugs[k.bug].cost[k.developer] as usize;
            let end = k.start + c - 1;
            if end > horizon {
                program.add_constraint(format!("horizon[{v}]"), vec![(v, 1.0)], Comparator::Eq, 0.0);
            }
            let cal = &instance.developers[k.developer].calendar;
            for u in k.start..=end.min(horizon) {
                if !cal.is_free(k.slot, u) {
                    program.add_constraint(format!("avail[{v},{u}]"), vec![(v, 1.0)], Comparator::Le, 0.0);
                }
            }
        }
    }

    // one bug per slot and day
    let mut cover: std::collections::BTreeMap<(usize, usize, usize), Vec<usize>> = Default::default();
    for (v, k) in vars.iter().enumerate() {
        let c = instance.bugs[k.bug].cost[k.developer] as usize;
        for u in k.start..(k.start + c).min(horizon + 1) {
            cover.entry((k.developer, k.slot, u)).or_default().push(v);
        }
    }
    for ((d, j, u), vs) in cover {
        if vs.len() > 1 {
            program.add_constraint(
                format!("slot[{},{j},{u}]", instance.developers[d].id),
                vs.iter().map(|&v| (v, 1.0)).collect(),
                Comparator::Le,
                1.0,
            );
        }
    }

    for (i, bug) in instance.bugs.iter().enumerate() {
        for &p in &bug.open_parents {
            // start(i) >= finish(p) + 1 when i is assigned
            let mut terms: Vec<(usize, f64)> = by_bug[i].iter().map(|&v| (v, vars[v].start as f64 - big_m)).collect();
            terms.extend(by_bug[p].iter().map(|&v| {
                let k = vars[v];
                (v, -((k.start + instance.bugs[p].cost[k.developer] as usize - 1) as f64))
            }));
            if !by_bug[i].is_empty() {
                program.add_constraint(format!("prec[{},{}]", instance.bugs[p].id, bug.id), terms, Comparator::Ge, 1.0 - big_m);
            }
            // i assigned only if p assigned
            let mut terms: Vec<(usize, f64)> = by_bug[i].iter().map(|&v| (v, 1.0)).collect();
            terms.extend(by_bug[p].iter().map(|&v| (v, -1.0)));
            if !by_bug[i].is_empty() {
                program.add_constraint(format!("cond[{},{}]", instance.bugs[p].id, bug.id), terms, Comparator::Le, 0.0);
            }
        }
        if compilation == Compilation::Explicit {
            for &(p, tau) in &bug.ledger_parents {
                let tau = tau.min(horizon) as f64;
                let terms: Vec<(usize, f64)> = by_bug[i].iter().map(|&v| (v, vars[v].start as f64 - big_m)).collect();
                if !terms.is_empty() {
                    program.add_constraint(format!("gate[{p},{}]", bug.id), terms, Comparator::Ge, tau + 1.0 - big_m);
                }
            }
        }
    }
    SdabtProgram { program, vars, big_m }
}

impl SdabtProgram {
    /// Turns a solver assignment into a plan.
    pub fn decode(&self, instance: &TriageInstance, assignment: &[bool], status: PlanStatus) -> TriagePlan {
        let mut assigned = vec![false; instance.bugs.len()];
        let mut assignments = Vec::new();
        for (v, k) in self.vars.iter().enumerate() {
            if assignment[v] {
                assigned[k.bug] = true;
                assignments.push(PlannedAssignment {
                    bug: instance.bugs[k.bug].id,
                    developer: instance.developers[k.developer].id.clone(),
                    slot: k.slot,
                    start_day: k.start,
                    duration: instance.bugs[k.bug].cost[k.developer],
                });
            }
        }
        let deferred = instance.bugs.iter().zip(&assigned).filter(|(_, a)| !**a).map(|(b, _)| b.id).collect();
        TriagePlan { assignments, deferred, objective_value: self.program.objective_value(assignment), solver_status: status }
    }
}

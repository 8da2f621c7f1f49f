//! Per-bug ranking baselines and the replay of historical decisions.

use crate::model::{PlanStatus, PlannedAssignment, TriagePlan};
use crate::textmine::argmax;

use super::board::Board;
use super::instance::TriageInstance;

fn rank_by(instance: &TriageInstance, score: impl Fn(usize, usize) -> f64) -> TriagePlan {
    let mut board = Board::new(instance);
    let mut assignments = Vec::new();
    let mut objective = 0.0;
    for (i, bug) in instance.bugs.iter().enumerate() {
        let scores: Vec<f64> = (0..instance.developers.len()).map(|d| score(i, d)).collect();
        let Some(d) = argmax(&scores) else { continue };
        let len = bug.cost[d] as usize;
        let (j, t) = board.least_loaded_slot(d, instance.developers[d].slot_count, len);
        board.claim(d, j, t, len);
        objective += scores[d];
        assignments.push(PlannedAssignment {
            bug: bug.id,
            developer: instance.developers[d].id.clone(),
            slot: j,
            start_day: t,
            duration: len as u32,
        });
    }
    let deferred = if instance.developers.is_empty() { instance.bug_ids() } else { Vec::new() };
    TriagePlan { assignments, deferred, objective_value: objective, solver_status: PlanStatus::Optimal }
}

/// Every bug goes to its most suitable developer.
pub fn rank_cbr(instance: &TriageInstance) -> TriagePlan {
    rank_by(instance, |i, d| instance.bugs[i].suitability[d])
}

/// Every bug goes to the developer with the best suitability/cost mix.
pub fn rank_costriage(instance: &TriageInstance) -> TriagePlan {
    rank_by(instance, |i, d| instance.coefficient(i, d))
}

/// Re-issues the recorded assignments that happened on this day.
///
/// The bug starts today with its recorded duration in the lowest slot that
/// is free for the whole run; when every planned slot is taken it spills
/// into an extra one so history is never bent to fit the capacity estimate.
/// Bugs without a record for today are deferred.
pub fn replay_actual(instance: &TriageInstance) -> TriagePlan {
    let mut board = Board::new(instance);
    let mut assignments = Vec::new();
    let mut deferred = Vec::new();
    for bug in &instance.bugs {
        let record = bug.ground_truth.as_ref().filter(|g| g.assign_day <= instance.day);
        let dev = record.and_then(|g| instance.developers.iter().position(|d| d.id == g.developer));
        let (Some(g), Some(d)) = (record, dev) else {
            deferred.push(bug.id);
            continue;
        };
        let len = g.duration.max(1) as usize;
        let j = (0..).find(|&j| board.earliest_start(d, j, 1, len) == 1).expect("unbounded slots");
        board.claim(d, j, 1, len);
        assignments.push(PlannedAssignment { bug: bug.id, developer: g.developer.clone(), slot: j, start_day: 1, duration: len as u32 });
    }
    TriagePlan { assignments, deferred, objective_value: 0.0, solver_status: PlanStatus::Optimal }
}

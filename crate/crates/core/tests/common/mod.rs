#![allow(dead_code)]

use rand::Rng;
use triage_core::model::Calendar;
use triage_core::strategies::{coefficient, InstanceBug, InstanceDeveloper, TriageInstance};
use triage_core::ingest::{EventKind, RawEvent};
use triage_core::sim::{BugForecast, DeveloperSetup, Scenario};
use triage_core::{BugId, DevId};

pub struct Shape {
    pub max_bugs: usize,
    pub max_devs: usize,
    pub max_slots: usize,
    pub max_horizon: usize,
}

pub const SMALL: Shape = Shape { max_bugs: 6, max_devs: 3, max_slots: 2, max_horizon: 5 };

/// A random well-formed triage instance with busy calendar days, open
/// blockers and already-assigned blockers.
pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> TriageInstance {
    let horizon = rng.gen_range(1..=shape.max_horizon);
    let n_devs = rng.gen_range(1..=shape.max_devs);
    let n_bugs = rng.gen_range(0..=shape.max_bugs);
    let developers = (0..n_devs)
        .map(|d| {
            let slots = rng.gen_range(1..=shape.max_slots);
            let rows = (0..slots).map(|_| (0..horizon).map(|_| rng.gen_bool(0.8)).collect()).collect();
            InstanceDeveloper::new(DevId::new(format!("d{d}")), Calendar::from_rows(rows))
        })
        .collect();
    let bugs = (0..n_bugs)
        .map(|i| {
            let open_parents = (0..i).filter(|_| rng.gen_bool(0.25)).collect();
            let ledger_parents =
                if rng.gen_bool(0.2) { vec![(BugId(1000 + i as u64), rng.gen_range(1..=horizon + 1))] } else { Vec::new() };
            InstanceBug {
                id: BugId(i as u64 + 1),
                suitability: (0..n_devs).map(|_| rng.gen_range(0.01..1.0)).collect(),
                cost: (0..n_devs).map(|_| rng.gen_range(1..=(horizon as u32 + 1).min(4))).collect(),
                open_parents,
                ledger_parents,
                ground_truth: None,
            }
        })
        .collect();
    TriageInstance { day: 0, horizon, alpha: rng.gen_range(0.0..=1.0), developers, bugs }
}

/// One bug's placement: developer, slot, start.
pub type Choice = Option<(usize, usize, usize)>;

/// Best objective over every feasible plan, found by walking placements
/// bug by bug and checking the scheduling rules directly. Blockers must come
/// before the bugs they block in the bug list.
pub fn brute_force_best(instance: &TriageInstance) -> f64 {
    let mut choices: Vec<Choice> = vec![None; instance.bugs.len()];
    let coef: Vec<Vec<f64>> = instance
        .bugs
        .iter()
        .map(|b| (0..instance.developers.len()).map(|d| coefficient(instance.alpha, &b.suitability, &b.cost, d).unwrap()).collect())
        .collect();
    let best_rest: Vec<f64> = (0..=instance.bugs.len())
        .map(|k| coef[k..].iter().map(|r| r.iter().copied().fold(0.0, f64::max)).sum())
        .collect();
    let mut best = 0.0;
    walk(instance, &coef, &best_rest, 0, 0.0, &mut choices, &mut best);
    best
}

fn options(instance: &TriageInstance, i: usize) -> Vec<(usize, usize, usize)> {
    let b = &instance.bugs[i];
    let earliest = b.ledger_parents.iter().map(|&(_, tau)| tau + 1).max().unwrap_or(1);
    let mut out = Vec::new();
    for (d, dev) in instance.developers.iter().enumerate() {
        let c = b.cost[d] as usize;
        for j in 0..dev.slot_count {
            for t in earliest..=instance.horizon {
                if t + c - 1 <= instance.horizon && (t..t + c).all(|u| dev.calendar.is_free(j, u)) {
                    out.push((d, j, t));
                }
            }
        }
    }
    out
}

fn clashes(instance: &TriageInstance, choices: &[Choice], i: usize, (d, j, t): (usize, usize, usize)) -> bool {
    let end = t + instance.bugs[i].cost[d] as usize - 1;
    choices[..i].iter().enumerate().any(|(k, c)| match *c {
        Some((d2, j2, t2)) if d2 == d && j2 == j => {
            let end2 = t2 + instance.bugs[k].cost[d2] as usize - 1;
            t <= end2 && t2 <= end
        }
        _ => false,
    })
}

fn dependencies_hold(instance: &TriageInstance, choices: &[Choice], i: usize) -> bool {
    let Some((_, _, t)) = choices[i] else { return true };
    instance.bugs[i].open_parents.iter().all(|&p| match choices[p] {
        Some((dp, _, tp)) => t > tp + instance.bugs[p].cost[dp] as usize - 1,
        None => false,
    })
}

fn walk(
    instance: &TriageInstance,
    coef: &[Vec<f64>],
    best_rest: &[f64],
    i: usize,
    value: f64,
    choices: &mut Vec<Choice>,
    best: &mut f64,
) {
    if value + best_rest[i] <= *best {
        return;
    }
    if i == instance.bugs.len() {
        *best = value;
        return;
    }
    choices[i] = None;
    if dependencies_hold(instance, choices, i) {
        walk(instance, coef, best_rest, i + 1, value, choices, best);
    }
    for opt in options(instance, i) {
        if clashes(instance, choices, i, opt) {
            continue;
        }
        choices[i] = Some(opt);
        if dependencies_hold(instance, choices, i) {
            walk(instance, coef, best_rest, i + 1, value + coef[i][opt.0], choices, best);
        }
    }
    choices[i] = None;
}

pub fn reported(bug: u64, day: triage_core::Day, component: &str) -> RawEvent {
    RawEvent::new(BugId(bug), day, EventKind::Reported { summary: format!("bug {bug}"), description: String::new(), component: component.into() })
}

pub fn depends(bug: u64, blocker: u64, day: triage_core::Day) -> RawEvent {
    RawEvent::new(BugId(bug), day, EventKind::DependencyAdded { blocker: BugId(blocker) })
}

/// A scenario over `window` where every bug costs `cost[d]` days for
/// developer `d` and suitability falls with the developer index.
pub fn scenario(developers: &[(&str, usize)], bugs: &[(u64, Vec<u32>)], mut events: Vec<RawEvent>, window: (triage_core::Day, triage_core::Day)) -> Scenario {
    let n = developers.len();
    events.sort_by_key(|e| e.day);
    Scenario {
        developers: developers.iter().map(|&(id, slot_count)| DeveloperSetup { id: DevId::new(id), slot_count }).collect(),
        forecasts: bugs
            .iter()
            .map(|(b, cost)| {
                let f = BugForecast { component: "c".into(), suitability: (0..n).map(|d| 1.0 / (d + 1) as f64).collect(), cost: cost.clone() };
                (BugId(*b), f)
            })
            .collect(),
        events,
        window,
    }
}

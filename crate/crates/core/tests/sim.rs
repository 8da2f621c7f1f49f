mod common;

use common::{depends, reported, scenario};
use triage_core::config::OffDay;
use triage_core::ilp::SolveOptions;
use triage_core::ingest::bugzilla::{load_dump, DayClock};
use triage_core::ingest::{build_dataset, EventKind, RawEvent};
use triage_core::metrics::divergence;
use triage_core::sim::{run, BugForecast, DeveloperSetup, Scenario, SimError, SimState, SimulationConfig, SimulationLedger};
use triage_core::strategies::{self, Strategy};
use triage_core::synth::{generate, SynthConfig};
use triage_core::BugId;

fn sdabt(horizon: usize) -> SimulationConfig {
    SimulationConfig::new(Strategy::Sdabt, 0.5, horizon)
}

fn starts(ledger: &SimulationLedger, bug: u64) -> Vec<(i64, i64)> {
    ledger.bugs[&BugId(bug)].episodes.iter().map(|e| (e.start_day, e.completion_day)).collect()
}

#[test]
fn window_without_events_gives_an_empty_ledger() {
    let s = scenario(&[("a", 1)], &[], Vec::new(), (1, 5));
    let l = run(&sdabt(3), &s).unwrap();
    assert_eq!(l.days.len(), 5);
    assert!(l.bugs.is_empty());
    assert!(l.days.iter().all(|d| d.assigned.is_empty() && d.completed.is_empty() && d.census.total() == 0));
}

#[test]
fn single_bug_is_assigned_on_its_report_day() {
    let s = scenario(&[("a", 1)], &[(1, vec![2])], vec![reported(1, 1, "c")], (1, 4));
    let l = run(&sdabt(3), &s).unwrap();
    assert_eq!(starts(&l, 1), vec![(1, 2)]);
    assert_eq!(l.days[0].assigned.len(), 1);
    assert_eq!(l.days[1].completed, vec![BugId(1)]);
    assert_eq!(l.days[1].census.completed, 1);
    assert_eq!(l.days[0].busy_slots, vec![1]);
    assert_eq!(l.days[2].busy_slots, vec![0]);
}

#[test]
fn blocker_finishes_before_its_child_starts() {
    let events = vec![reported(1, 1, "c"), reported(2, 1, "c"), depends(2, 1, 1)];
    let s = scenario(&[("a", 1)], &[(1, vec![1]), (2, vec![1])], events, (1, 3));
    let l = run(&sdabt(3), &s).unwrap();
    assert_eq!(starts(&l, 1), vec![(1, 1)]);
    assert_eq!(starts(&l, 2), vec![(2, 2)]);
    assert_eq!(l.bugs[&BugId(2)].episodes[0].blockers, vec![BugId(1)]);
    assert_eq!(l.days[0].completed, vec![BugId(1)]);
    assert_eq!(l.days[1].completed, vec![BugId(2)]);
}

#[test]
fn calendars_shift_one_day_and_append_off_days() {
    let s = scenario(&[("a", 1)], &[(1, vec![3])], vec![reported(1, 10, "c")], (10, 20));
    let off = vec![OffDay { developer: None, day: 15 }];
    let mut st = SimState::new(&s, 5, off);
    assert_eq!(st.calendars[0].rows()[0], vec![true, true, true, true, true]);
    for e in &s.events {
        st.apply(e);
    }
    let inst = st.instance(&s, 0.5);
    let plan = strategies::plan(Strategy::Sdabt, &inst, &SolveOptions::default()).unwrap();
    st.commit(&plan);
    assert_eq!(st.calendars[0].rows()[0], vec![false, false, false, true, true]);
    st.advance_day();
    // day 15 is the new last column and is an off-day
    assert_eq!(st.calendars[0].rows()[0], vec![false, false, true, true, false]);
    st.advance_day();
    assert_eq!(st.calendars[0].rows()[0], vec![false, true, true, false, true]);
}

#[test]
fn free_calendar_stays_free() {
    let s = scenario(&[("a", 2)], &[], Vec::new(), (0, 9));
    let mut st = SimState::new(&s, 4, Vec::new());
    for _ in 0..6 {
        st.advance_day();
    }
    assert!(st.calendars[0].rows().iter().all(|r| r.iter().all(|&f| f)));
    assert_eq!(st.day, 6);
}

#[test]
fn feasible_bugs_follow_reports_blocks_and_fixes() {
    // bug 1 costs more than the horizon, so its child 2 waits forever
    let events = vec![reported(1, 0, "c"), reported(2, 0, "c"), depends(2, 1, 0), reported(3, 0, "c"), reported(4, 1, "c")];
    let s = scenario(&[("a", 1)], &[(1, vec![9]), (2, vec![1]), (3, vec![1]), (4, vec![1])], events, (0, 3));
    let mut st = SimState::new(&s, 3, Vec::new());
    let mut seen = Vec::new();
    for day in 0..3 {
        for e in s.events.iter().filter(|e| e.day == day) {
            st.apply(e);
        }
        seen.push(st.feasible_bugs());
        let plan = strategies::plan(Strategy::Sdabt, &st.instance(&s, 0.5), &SolveOptions::default()).unwrap();
        st.commit(&plan);
        st.advance_day();
    }
    let ids = |v: &[u64]| v.iter().map(|&b| BugId(b)).collect::<Vec<_>>();
    // day 0: bug 4 is not reported yet; day 1: bug 3 was fixed on day 0
    assert_eq!(seen[0], ids(&[1, 2, 3]));
    assert_eq!(seen[1], ids(&[1, 2, 4]));
    assert_eq!(seen[2], ids(&[1, 2]));
}

fn small_corpus(seed: u64) -> Scenario {
    let cfg = SynthConfig { seed, train_bugs: 0, test_bugs: 60, train_days: 1, test_days: 40, ..Default::default() };
    let corpus = generate(&cfg);
    let slots: Vec<usize> = (0..corpus.developers.len()).map(|d| 1 + d % 2).collect();
    corpus.oracle_scenario(&slots)
}

fn quick(strategy: Strategy) -> SimulationConfig {
    let mut c = SimulationConfig::new(strategy, 0.5, 6);
    c.solver.budget.max_nodes = 4_000;
    c
}

#[test]
fn every_day_conserves_bugs() {
    let s = small_corpus(3);
    for strategy in Strategy::ALL {
        let l = run(&quick(strategy), &s).unwrap();
        assert!(l.slots_are_disjoint(), "{strategy}");
        for d in &l.days {
            assert_eq!(d.census.total(), l.bugs.len(), "{strategy} day {}", d.day);
            let working = l.bugs.values().filter(|b| b.episodes.iter().any(|e| e.decided_day <= d.day && e.completion_day > d.day)).count();
            assert_eq!(d.census.in_progress, working, "{strategy} day {}", d.day);
            assert_eq!(d.open_bug_count, d.assigned.len() + d.deferred_count);
        }
    }
}

#[test]
fn replays_are_deterministic() {
    let s = small_corpus(11);
    for strategy in [Strategy::Sdabt, Strategy::Dabt, Strategy::Cbr] {
        let a = run(&quick(strategy), &s).unwrap();
        let b = run(&quick(strategy), &s).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}

#[test]
fn ledger_survives_json_and_writes_one_csv_row_per_day() {
    let s = small_corpus(5);
    let l = run(&quick(Strategy::Sdabt), &s).unwrap();
    assert_eq!(SimulationLedger::from_json(&l.to_json().unwrap()).unwrap(), l);
    let mut out = Vec::new();
    l.write_daily_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), l.days.len() + 1);
}

#[test]
fn actual_replays_the_recorded_history() {
    let clock = DayClock::new("2020-01-01").unwrap();
    let events = load_dump(include_str!("fixtures/tiny_dump.json").as_bytes(), (0, 59), &clock).unwrap();
    let ds = build_dataset("tiny", &events, (0, 30), (31, 59)).unwrap();
    let test = ds.test_events();
    let forecasts = test
        .iter()
        .filter(|e| e.is_reported())
        .map(|e| (e.bug, BugForecast { component: "c".into(), suitability: vec![0.5, 0.5], cost: vec![1, 1] }))
        .collect();
    let developers = ds.manifest.plan.active_developers.iter().map(|d| DeveloperSetup { id: d.clone(), slot_count: 1 }).collect();
    let s = Scenario { developers, forecasts, events: test, window: (31, 59) };
    let l = run(&SimulationConfig::new(Strategy::Actual, 0.5, 5), &s).unwrap();
    assert_eq!(l.bugs.len(), 6);
    for b in l.bugs.values() {
        let rec = b.recorded.as_ref().unwrap();
        let e = b.last().unwrap();
        assert_eq!((&e.developer, e.start_day, e.completion_day), (&rec.developer, rec.assign_day, rec.fix_day), "{}", b.bug);
    }
    assert_eq!(divergence(&l).0.mean, 0.0);
    assert!(l.days.iter().all(|d| d.census.total() == 6));
}

#[test]
fn reopened_bugs_are_offered_again() {
    let events = vec![reported(1, 0, "c"), RawEvent::new(BugId(1), 2, EventKind::Reopened)];
    let s = scenario(&[("a", 1)], &[(1, vec![1])], events, (0, 4));
    let l = run(&sdabt(3), &s).unwrap();
    assert_eq!(starts(&l, 1), vec![(0, 0), (2, 2)]);
}

#[test]
fn meta_bugs_are_excluded() {
    let events = vec![reported(1, 0, "c"), RawEvent::new(BugId(1), 0, EventKind::MetaFlagged), reported(2, 0, "c")];
    let s = scenario(&[("a", 1)], &[(1, vec![1]), (2, vec![1])], events, (0, 1));
    let l = run(&sdabt(3), &s).unwrap();
    assert!(l.bugs[&BugId(1)].excluded && l.bugs[&BugId(1)].episodes.is_empty());
    assert_eq!(l.days[0].census.excluded, 1);
    assert_eq!(l.days[0].open_bug_count, 1);
}

#[test]
fn blocker_reported_later_still_gates_the_child() {
    // the arc is announced before the blocker exists
    let events = vec![reported(2, 0, "c"), depends(2, 1, 0), reported(1, 0, "c")];
    let s = scenario(&[("a", 1)], &[(1, vec![1]), (2, vec![1])], events, (0, 2));
    let l = run(&sdabt(3), &s).unwrap();
    assert_eq!(starts(&l, 1), vec![(0, 0)]);
    assert_eq!(starts(&l, 2), vec![(1, 1)]);
}

#[test]
fn bad_settings_are_rejected() {
    let s = scenario(&[("a", 1)], &[(1, vec![1])], vec![reported(1, 0, "c")], (0, 1));
    assert!(matches!(run(&SimulationConfig::new(Strategy::Sdabt, 1.5, 3), &s), Err(SimError::Config)));
    assert!(matches!(run(&sdabt(0), &s), Err(SimError::Config)));
    let mut short = s.clone();
    short.forecasts.get_mut(&BugId(1)).unwrap().cost.clear();
    assert!(matches!(run(&sdabt(3), &short), Err(SimError::Forecast { bug: BugId(1) })));
    let nobody = Scenario { developers: Vec::new(), ..s };
    assert!(matches!(run(&sdabt(3), &nobody), Err(SimError::NoDevelopers)));
}

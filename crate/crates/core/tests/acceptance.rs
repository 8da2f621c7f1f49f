//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triage_core::config::Config;
use triage_core::ilp::{solve, BinaryProgram, Budget, Comparator, SolveOptions, SolveStatus};
use triage_core::ingest::bugzilla::{load_dump, DayClock};
use triage_core::ingest::estimate::{active_from_counts, slot_count_from_daily};
use triage_core::ingest::{build_dataset, outlier_threshold, EventKind};
use triage_core::metrics::{compare_pair, divergence, exact_counts, wilcoxon_signed_rank, Alternative, MetricsReport};
use triage_core::pipeline::train;
use triage_core::sim::{run, BugForecast, DeveloperSetup, Scenario, SimError, SimulationConfig, SimulationLedger};
use triage_core::strategies::{self, build_sdabt, Compilation, SdabtProgram, Strategy, TriageInstance};
use triage_core::synth::{generate, SynthConfig};
use triage_core::DevId;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn exhaustive() -> SolveOptions {
    SolveOptions { budget: Budget { max_nodes: u64::MAX, max_time: None }, ..Default::default() }
}

fn random_program(rng: &mut ChaCha8Rng) -> BinaryProgram {
    let n = rng.gen_range(1..=14);
    let mut p = BinaryProgram::new();
    for i in 0..n {
        p.add_var(format!("x{i}"), rng.gen_range(-5..=5) as f64);
    }
    for k in 0..rng.gen_range(0..=6) {
        let mut terms = Vec::new();
        for v in 0..n {
            if rng.gen_bool(0.5) {
                terms.push((v, rng.gen_range(-4..=4) as f64));
            }
        }
        let cmp = match rng.gen_range(0..10) {
            0 => Comparator::Eq,
            1..=3 => Comparator::Ge,
            _ => Comparator::Le,
        };
        p.add_constraint(format!("c{k}"), terms, cmp, rng.gen_range(-3..=6) as f64);
    }
    p
}

/// Best objective over all 2^n assignments and the preferred optimum: the
/// largest bit pattern with the first variable as the most significant bit.
fn enumerate_program(p: &BinaryProgram) -> Option<(f64, Vec<bool>)> {
    let n = p.num_vars();
    let mut best: Option<(f64, Vec<bool>)> = None;
    for mask in (0u32..1 << n).rev() {
        let x: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
        if !p.verify(&x).unwrap().feasible {
            continue;
        }
        let v = p.objective_value(&x);
        if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-9) {
            best = Some((v, x));
        }
    }
    best
}

fn solver_exactness() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut triage_agree = 0;
    for _ in 0..500 {
        let inst = common::random_instance(&mut rng, &common::SMALL);
        let plan = strategies::plan(Strategy::Sdabt, &inst, &exhaustive()).unwrap();
        if (plan.objective_value - common::brute_force_best(&inst)).abs() < 1e-9 {
            triage_agree += 1;
        }
    }
    let mut generic_agree = 0;
    for _ in 0..200 {
        let p = random_program(&mut rng);
        let r = solve(&p, &exhaustive()).unwrap();
        let ok = match enumerate_program(&p) {
            None => r.status == SolveStatus::Infeasible,
            Some((v, x)) => r.status == SolveStatus::Optimal && (r.objective - v).abs() < 1e-9 && r.assignment == x,
        };
        generic_agree += usize::from(ok);
    }
    let elapsed = started.elapsed();
    outcome(
        triage_agree == 500 && generic_agree == 200 && elapsed < Duration::from_secs(60),
        format!("triage {triage_agree}/500, generic {generic_agree}/200, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn optimum(built: &SdabtProgram) -> f64 {
    solve(&built.program, &exhaustive()).unwrap().objective
}

fn formulation_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut same = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let inst = common::random_instance(&mut rng, &common::SMALL);
        let a = optimum(&build_sdabt(&inst, Compilation::Eliminated));
        let b = optimum(&build_sdabt(&inst, Compilation::Explicit));
        worst = worst.max((a - b).abs());
        same += usize::from((a - b).abs() < 1e-9);
    }
    outcome(same == 200, format!("{same}/200 equal optima, largest gap {worst:.1e}"))
}

fn plan_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut violations, mut audits_failed, mut assigned) = (0, 0, 0);
    for r in 0..50 {
        let cfg = SynthConfig {
            seed: 300 + r,
            train_bugs: 0,
            train_days: 1,
            test_bugs: rng.gen_range(80..=160),
            test_days: 200,
            dependency_rate: rng.gen_range(0.1..0.5),
            ..Default::default()
        };
        let corpus = generate(&cfg);
        let slots: Vec<usize> = corpus.developers.iter().map(|_| rng.gen_range(1..=3)).collect();
        let scenario = corpus.oracle_scenario(&slots);
        let mut sim = SimulationConfig::new(Strategy::Sdabt, rng.gen_range(0.0..=1.0), rng.gen_range(2..=8));
        sim.solver.budget.max_nodes = 20_000;
        match run(&sim, &scenario) {
            Ok(ledger) => {
                assigned += ledger.bugs.values().filter(|b| !b.episodes.is_empty()).count();
                audits_failed += usize::from(!audit(&ledger, &scenario));
            }
            Err(SimError::Validation { violations: v, .. }) => violations += v.len(),
            Err(e) => panic!("replay {r} failed: {e}"),
        }
    }
    outcome(
        violations == 0 && audits_failed == 0,
        format!("50 replays, {assigned} assignments, {violations} validator violations, {audits_failed} failed ledger audits"),
    )
}

/// Whole-run checks on the ledger: one episode per assignment, disjoint
/// slots, work inside the horizon of its decision day, and every blocker
/// announced by the decision day finished before the start.
fn audit(ledger: &SimulationLedger, scenario: &Scenario) -> bool {
    let horizon = ledger.horizon as i64;
    let within = ledger.bugs.values().flat_map(|b| &b.episodes).all(|e| {
        e.start_day >= e.decided_day && e.completion_day == e.start_day + e.duration as i64 - 1 && e.completion_day < e.decided_day + horizon
    });
    let assigned_per_day: usize = ledger.days.iter().map(|d| d.assigned.len()).sum();
    let episodes: usize = ledger.bugs.values().map(|b| b.episodes.len()).sum();
    let precedence = scenario.events.iter().all(|ev| {
        let EventKind::DependencyAdded { blocker } = ev.kind else { return true };
        let (Some(child), Some(parent)) = (ledger.bugs.get(&ev.bug), ledger.bugs.get(&blocker)) else { return true };
        child.episodes.iter().filter(|e| e.decided_day >= ev.day).all(|e| {
            parent.excluded
                || parent.report_day.is_none_or(|r| r > e.decided_day)
                || parent.episodes.iter().any(|pe| pe.completion_day < e.start_day)
        })
    });
    within && precedence && assigned_per_day == episodes && ledger.slots_are_disjoint()
}

fn directional_claims() -> Outcome {
    let started = Instant::now();
    let synth = SynthConfig::default();
    let corpus = generate(&synth);
    let dataset = build_dataset("synthetic", &corpus.events, corpus.train_window, corpus.test_window).unwrap();
    let config = Config { project: "synthetic".into(), train_window: corpus.train_window, test_window: corpus.test_window, ..Default::default() };
    let models = train(&config, &dataset).unwrap();
    let scenario = models.scenario(&dataset, corpus.test_window);
    let report = |strategy| {
        let mut sim = SimulationConfig::new(strategy, 0.5, models.horizon);
        sim.solver.budget.max_nodes = 20_000;
        MetricsReport::compute("synthetic", &run(&sim, &scenario).unwrap(), &models.experience)
    };
    let (sdabt, dabt, cbr) = (report(Strategy::Sdabt), report(Strategy::Dabt), report(Strategy::Cbr));
    let load_ratio = cbr.max_developer_load as f64 / sdabt.max_developer_load.max(1) as f64;
    let cmp = compare_pair(&sdabt, &dabt);
    let p = |i: usize| cmp[i].result.map_or(1.0, |r| r.p_value);
    let elapsed = started.elapsed();
    let checks = [
        load_ratio >= 2.0,
        sdabt.mean_fixing_days <= cbr.mean_fixing_days,
        p(0) < 0.05,
        p(1) < 0.05,
        elapsed < Duration::from_secs(600),
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "max load CBR {} vs S-DABT {} ({load_ratio:.2}x); fixing days {:.2} vs CBR {:.2}; weekly slot utilization p = {:.4}; daily assigned p = {:.4}; {:.0}s",
            cbr.max_developer_load,
            sdabt.max_developer_load,
            sdabt.mean_fixing_days,
            cbr.mean_fixing_days,
            p(0),
            p(1),
            elapsed.as_secs_f64()
        ),
    )
}

/// Upper-tail p-value by flipping every sign, with ranks taken straight
/// from their definition.
fn enumerated_p(diffs: &[f64]) -> f64 {
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let rank = |x: f64| {
        let below = abs.iter().filter(|&&y| y < x).count() as f64;
        let equal = abs.iter().filter(|&&y| y == x).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let ranks: Vec<f64> = abs.iter().map(|&x| rank(x)).collect();
    let observed: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let n = diffs.len();
    let hits = (0u32..1 << n)
        .filter(|mask| {
            let w: f64 = ranks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum();
            w >= observed - 1e-9
        })
        .count();
    hits as f64 / (1u64 << n) as f64
}

fn statistics() -> Outcome {
    let b: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let a: Vec<f64> = b.iter().map(|x| x + 1.0).collect();
    let p10 = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap().p_value;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut matched = 0;
    let mut cases = 0;
    for n in 1..=12 {
        let plain: Vec<u64> = (1..=n as u64).map(|r| 2 * r).collect();
        let sums = exact_counts(&plain);
        let by_hand = (0u32..1 << n).fold(vec![0.0; sums.len()], |mut acc, mask| {
            let s: u64 = plain.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum();
            acc[s as usize] += 1.0;
            acc
        });
        cases += 1;
        matched += usize::from(sums == by_hand);
        for _ in 0..5 {
            let diffs: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=4) as f64 * if rng.gen_bool(0.6) { 1.0 } else { -1.0 }).collect();
            let zeros = vec![0.0; n];
            let p = wilcoxon_signed_rank(&diffs, &zeros, Alternative::Greater).unwrap().p_value;
            cases += 1;
            matched += usize::from((p - enumerated_p(&diffs)).abs() < 1e-12);
        }
    }
    outcome(
        (p10 - 1.0 / 1024.0).abs() < 1e-9 && matched == cases,
        format!("n=10 all positive p = {p10:.9}; {matched}/{cases} distributions and tied p-values match enumeration for n <= 12"),
    )
}

fn estimation() -> Outcome {
    let counts = [("d1", 1), ("d2", 2), ("d3", 3), ("d4", 10), ("d5", 20)].into_iter().map(|(d, c)| (DevId::new(d), c)).collect();
    let active: Vec<String> = active_from_counts(&counts).unwrap().into_iter().map(|d| d.0).collect();
    let equal = [("a", 4), ("b", 4), ("c", 4)].into_iter().map(|(d, c)| (DevId::new(d), c)).collect();
    let checks = [
        active == ["d4", "d5"],
        active_from_counts(&equal).unwrap().len() == 3,
        slot_count_from_daily(&[1, 1, 2, 1, 3]) == 3,
        slot_count_from_daily(&[1, 1, 1, 1]) == 1,
        slot_count_from_daily(&[2, 2, 2, 2, 6]) == 2,
        slot_count_from_daily(&[]) == 1,
        outlier_threshold(&[2.0, 3.0, 3.0, 3.0, 3.0, 5.0, 28.0]) == Some(5.5),
    ];
    let passed = checks.iter().filter(|&&c| c).count();
    outcome(
        passed == checks.len(),
        format!("{passed}/{} hand examples exact; real-project thresholds skipped (needs network datasets)", checks.len()),
    )
}

fn alpha_endpoints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cost_ok, mut suit_ok, mut windows_ok, mut windows_tried) = (0, 0, 0, 0);
    for _ in 0..50 {
        let mut inst = common::random_instance(&mut rng, &common::SMALL);
        inst.alpha = 1.0;
        let built = build_sdabt(&inst, Compilation::Eliminated);
        let base = optimum(&built);

        // any positive cost matrix, feasibility windows held fixed
        let perturbed: Vec<Vec<u32>> = inst.bugs.iter().map(|b| b.cost.iter().map(|&c| c * rng.gen_range(1..=5) + rng.gen_range(0..3)).collect()).collect();
        let reweighted = reweight(&built, &inst, &perturbed);
        cost_ok += usize::from(solve(&reweighted, &exhaustive()).unwrap().objective == base);

        // raise costs only where no start fits at all, so the compiled rows are unchanged
        let mut raised = inst.clone();
        for (i, b) in raised.bugs.iter_mut().enumerate() {
            for (d, c) in b.cost.iter_mut().enumerate() {
                if !built.vars.iter().any(|v| v.bug == i && v.developer == d) {
                    *c += rng.gen_range(1..=3);
                }
            }
        }
        let rebuilt = build_sdabt(&raised, Compilation::Eliminated);
        if rebuilt.program.constraints() == built.program.constraints() && raised.bugs != inst.bugs {
            windows_tried += 1;
            windows_ok += usize::from(optimum(&rebuilt) == base);
        }

        inst.alpha = 0.0;
        let base = optimum(&build_sdabt(&inst, Compilation::Eliminated));
        let mut scaled = inst.clone();
        for b in &mut scaled.bugs {
            let k = rng.gen_range(0.05..20.0);
            b.suitability.iter_mut().for_each(|s| *s *= k);
        }
        suit_ok += usize::from(optimum(&build_sdabt(&scaled, Compilation::Eliminated)) == base);
    }
    outcome(
        cost_ok == 50 && suit_ok == 50 && windows_ok == windows_tried && windows_tried > 0,
        format!(
            "alpha=1 cost perturbation {cost_ok}/50 (plus {windows_ok}/{windows_tried} with raised unusable costs); alpha=0 suitability scaling {suit_ok}/50"
        ),
    )
}

/// The same rows with objective coefficients recomputed from `cost`.
fn reweight(built: &SdabtProgram, inst: &TriageInstance, cost: &[Vec<u32>]) -> BinaryProgram {
    let mut p = BinaryProgram::new();
    for (k, v) in built.vars.iter().enumerate() {
        let b = &inst.bugs[v.bug];
        let c = strategies::coefficient(inst.alpha, &b.suitability, &cost[v.bug], v.developer).unwrap();
        p.add_var(built.program.labels()[k].clone(), c);
    }
    for c in built.program.constraints() {
        p.add_constraint(c.name.clone(), c.terms.clone(), c.cmp, c.rhs);
    }
    p
}

fn replay_fidelity() -> Outcome {
    let mut scenarios = Vec::new();
    let clock = DayClock::new("2020-01-01").unwrap();
    let events = load_dump(include_str!("fixtures/tiny_dump.json").as_bytes(), (0, 59), &clock).unwrap();
    let ds = build_dataset("tiny", &events, (0, 30), (31, 59)).unwrap();
    let test = ds.test_events();
    let developers: Vec<DeveloperSetup> = ds.manifest.plan.active_developers.iter().map(|d| DeveloperSetup { id: d.clone(), slot_count: 1 }).collect();
    let n = developers.len();
    let forecasts = test
        .iter()
        .filter(|e| e.is_reported())
        .map(|e| (e.bug, BugForecast { component: String::new(), suitability: vec![1.0; n], cost: vec![1; n] }))
        .collect();
    scenarios.push(("dump fixture", Scenario { developers, forecasts, events: test, window: (31, 59) }));
    for seed in [21, 22, 23] {
        let corpus = generate(&SynthConfig { seed, train_bugs: 0, train_days: 1, test_bugs: 150, test_days: 90, ..Default::default() });
        scenarios.push(("synthetic", corpus.oracle_scenario(&vec![1; corpus.developers.len()])));
    }
    let (mut replayed, mut mismatched, mut broken_days, mut max_div) = (0, 0, 0, 0.0f64);
    for (_, s) in &scenarios {
        let ledger = run(&SimulationConfig::new(Strategy::Actual, 0.5, 5), s).unwrap();
        for b in ledger.bugs.values() {
            let Some(rec) = &b.recorded else { continue };
            replayed += 1;
            let ok = b.episodes.len() == 1
                && b.last().is_some_and(|e| e.developer == rec.developer && e.start_day == rec.assign_day && e.completion_day == rec.fix_day);
            mismatched += usize::from(!ok);
        }
        let (spread, _) = divergence(&ledger);
        max_div = max_div.max(spread.mean).max(spread.std_dev);
        broken_days += ledger.days.iter().filter(|d| d.census.total() != ledger.bugs.len()).count();
    }
    outcome(
        mismatched == 0 && max_div == 0.0 && broken_days == 0 && replayed > 0,
        format!("{replayed} recorded bugs over {} fixtures, {mismatched} mismatches, divergence {max_div}, {broken_days} days breaking conservation", scenarios.len()),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("solver exactness", solver_exactness),
        ("formulation fidelity", formulation_fidelity),
        ("plan invariants", plan_invariants),
        ("directional claims", directional_claims),
        ("statistics", statistics),
        ("estimation formulas", estimation),
        ("alpha endpoints", alpha_endpoints),
        ("replay fidelity", replay_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

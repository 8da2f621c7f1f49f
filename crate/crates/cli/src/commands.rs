use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use triage_core::config::{Config, Horizon};
use triage_core::ilp::lp_format::to_lp;
use triage_core::ingest::bugzilla::{fetch_project, load_dump, Cached, DayClock, HttpTransport, Retrying, Transport};
use triage_core::ingest::filters::STAGE_NAMES;
use triage_core::ingest::{build_dataset, Dataset, StageCounts};
use triage_core::metrics::{compare_pair, write_reports_csv, Experience, MetricsReport};
use triage_core::par;
use triage_core::pipeline::{self, TrainedModels};
use triage_core::sim::{self, SimError, SimulationConfig, SimulationLedger};
use triage_core::strategies::{program_for, Strategy, StrategyError};
use triage_core::synth::{generate, SynthConfig};

use crate::{Failure, OrExit, Status};

fn print_counts(label: &str, c: &StageCounts) {
    let stages: Vec<String> = STAGE_NAMES.iter().zip(c.after).map(|(n, k)| format!("{n}={k}")).collect();
    println!("{label}: raw={} {}", c.raw, stages.join(" "));
}

fn save_dataset(dataset: &Dataset, out: &Path) -> Result<(), Failure> {
    dataset.save(out).or_exit(Status::Io)?;
    print_counts("train", &dataset.manifest.train_counts);
    print_counts("test", &dataset.manifest.test_counts);
    println!("wrote {} events to {}", dataset.events.len(), out.display());
    Ok(())
}

pub fn ingest(config: &Config, endpoint: Option<String>, dump: Option<PathBuf>, out: &Path) -> Result<(), Failure> {
    let clock = DayClock::new(&config.ingest.epoch).or_exit(Status::Usage)?;
    let span = (config.train_window.0, config.test_window.1);
    let events = match (dump, endpoint.or_else(|| config.ingest.endpoint.clone())) {
        (Some(path), _) => {
            let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display())).or_exit(Status::Ingest)?;
            load_dump(std::io::BufReader::new(file), span, &clock).or_exit(Status::Ingest)?
        }
        (None, Some(base)) => {
            let token = std::env::var(&config.ingest.token_env).ok().filter(|t| !t.is_empty());
            let http = HttpTransport::new(token).or_exit(Status::Ingest)?;
            let backoff = Duration::from_millis(config.ingest.backoff_ms);
            let transport: Box<dyn Transport> = match &config.ingest.cache_dir {
                Some(dir) => Box::new(Cached::new(Retrying::new(http, config.ingest.retries, backoff), dir)),
                None => Box::new(Retrying::new(http, config.ingest.retries, backoff)),
            };
            fetch_project(transport.as_ref(), &base, &config.project, span, &clock, config.ingest.max_concurrency.max(1))
                .or_exit(Status::Ingest)?
        }
        (None, None) => return Err(anyhow!("give --dump or --endpoint (or set ingest.endpoint)")).or_exit(Status::Usage),
    };
    let dataset = build_dataset(&config.project, &events, config.train_window, config.test_window).or_exit(Status::Ingest)?;
    save_dataset(&dataset, out)
}

fn load_dataset(dir: &Path) -> Result<Dataset, Failure> {
    Dataset::load(dir).with_context(|| format!("loading dataset {}", dir.display())).or_exit(Status::Io)
}

fn load_models(path: &Path) -> Result<TrainedModels, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).or_exit(Status::Io)?;
    TrainedModels::from_json(&text).with_context(|| format!("loading {}", path.display())).or_exit(Status::Io)
}

pub fn train(config: &Config, dataset: &Path, out: &Path) -> Result<(), Failure> {
    let dataset = load_dataset(dataset)?;
    let mut config = config.clone();
    config.train_window = dataset.manifest.train_window;
    let models = pipeline::train(&config, &dataset).or_exit(Status::Training)?;
    fs::write(out, models.to_json().or_exit(Status::Io)?).or_exit(Status::Io)?;
    println!(
        "trained {} developers, {} topics, horizon {} days; wrote {}",
        models.developers.len(),
        models.topics.k,
        models.horizon,
        out.display()
    );
    Ok(())
}

fn sim_status(e: &SimError) -> Status {
    match e {
        SimError::Config => Status::Usage,
        SimError::Strategy { source: StrategyError::NoIncumbent { .. }, .. } => Status::SolveTimeout,
        SimError::Validation { .. } => Status::Validation,
        _ => Status::Io,
    }
}

fn sim_config(config: &Config, models: &TrainedModels, strategy: Strategy, alpha: f64) -> SimulationConfig {
    let horizon = match config.horizon {
        Horizon::Days(n) => n,
        Horizon::Auto => models.horizon,
    };
    let mut s = SimulationConfig::new(strategy, alpha, horizon);
    s.solver = config.solver.options(config.execution);
    s.off_days = config.off_days.clone();
    s
}

/// One timed replay and its report.
fn replay(
    config: &Config,
    dataset: &Dataset,
    models: &TrainedModels,
    strategy: Strategy,
    alpha: f64,
    observe: impl FnMut(&triage_core::strategies::TriageInstance),
) -> Result<(SimulationLedger, MetricsReport), Failure> {
    let scenario = models.scenario(dataset, dataset.manifest.test_window);
    let started = Instant::now();
    let ledger = sim::run_observed(&sim_config(config, models, strategy, alpha), &scenario, observe).map_err(|e| Failure {
        status: sim_status(&e),
        error: anyhow::Error::new(e).context(format!("{strategy} replay at alpha {alpha}")),
    })?;
    let mut report = MetricsReport::compute(&models.project, &ledger, &models.experience);
    report.run_wall_time = started.elapsed().as_secs_f64();
    Ok((ledger, report))
}

pub fn simulate(
    config: &Config,
    dataset: &Path,
    models: &Path,
    strategy: Strategy,
    out: &Path,
    dump_lp: Option<&Path>,
) -> Result<(), Failure> {
    let dataset = load_dataset(dataset)?;
    let models = load_models(models)?;
    let mut programs = Vec::new();
    let (ledger, report) = replay(config, &dataset, &models, strategy, config.alpha, |inst| {
        if dump_lp.is_some() {
            if let Some(p) = program_for(strategy, inst) {
                programs.push((inst.day, to_lp(&p)));
            }
        }
    })?;
    fs::create_dir_all(out).or_exit(Status::Io)?;
    fs::write(out.join("ledger.json"), ledger.to_json().or_exit(Status::Io)?).or_exit(Status::Io)?;
    ledger.write_daily_csv(fs::File::create(out.join("daily.csv")).or_exit(Status::Io)?).or_exit(Status::Io)?;
    fs::write(out.join("metrics.json"), serde_json::to_string_pretty(&report).or_exit(Status::Io)? + "\n").or_exit(Status::Io)?;
    write_reports_csv(fs::File::create(out.join("metrics.csv")).or_exit(Status::Io)?, std::slice::from_ref(&report))
        .or_exit(Status::Io)?;
    if let Some(dir) = dump_lp {
        fs::create_dir_all(dir).or_exit(Status::Io)?;
        for (day, text) in &programs {
            fs::write(dir.join(format!("day_{day}.lp")), text).or_exit(Status::Io)?;
        }
        println!("wrote {} programs to {}", programs.len(), dir.display());
    }
    println!(
        "{strategy}: assigned {} of {} bugs, mean fixing {:.2} days, overdue {:.1}%, slot utilization {:.3}, {:.1}s",
        report.assigned_count,
        report.assigned_count + report.unassigned_count,
        report.mean_fixing_days,
        report.overdue_pct,
        mean(&report.slot_utilization_series),
        report.run_wall_time
    );
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn sweep(
    config: &Config,
    dataset: &Path,
    models: &Path,
    alphas: &[f64],
    strategy: Strategy,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let alphas = if alphas.is_empty() { vec![config.alpha] } else { alphas.to_vec() };
    if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(anyhow!("alpha {bad} is outside [0, 1]")).or_exit(Status::Usage);
    }
    let dataset = load_dataset(dataset)?;
    let models = load_models(models)?;
    let runs = par::map(config.execution, &alphas, |&a| replay(config, &dataset, &models, strategy, a, |_| {}).map(|r| r.1));
    let reports = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    match out {
        Some(path) => write_reports_csv(fs::File::create(path).or_exit(Status::Io)?, &reports).or_exit(Status::Io)?,
        None => write_reports_csv(std::io::stdout().lock(), &reports).or_exit(Status::Io)?,
    }
    Ok(())
}

pub fn compare(config: &Config, ledgers: &[PathBuf], models: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let experience = match models {
        Some(p) => load_models(p)?.experience,
        None => Experience::new(),
    };
    let mut reports = Vec::new();
    for path in ledgers {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).or_exit(Status::Io)?;
        let ledger = SimulationLedger::from_json(&text).with_context(|| format!("parsing {}", path.display())).or_exit(Status::Io)?;
        reports.push(MetricsReport::compute(&config.project, &ledger, &experience));
    }

    println!(
        "{:<10} {:>6} {:>9} {:>6} {:>8} {:>8} {:>9} {:>8} {:>8}",
        "strategy", "alpha", "assigned", "devs", "fixing", "overdue", "accuracy", "infeas", "slot_use"
    );
    for r in &reports {
        println!(
            "{:<10} {:>6.2} {:>9} {:>6} {:>8.2} {:>8.1} {:>9.1} {:>8.1} {:>8.3}",
            r.strategy.name(),
            r.alpha,
            r.assigned_count,
            r.developers_used,
            r.mean_fixing_days,
            r.overdue_pct,
            r.accuracy_pct,
            r.infeasible_dependency_pct,
            mean(&r.slot_utilization_series)
        );
    }

    let (first, rest) = reports.split_first().expect("clap requires one ledger");
    for other in rest {
        println!(
            "\n{} minus {}: assigned {:+}, fixing {:+.2} days, overdue {:+.1} points, slot utilization {:+.3}",
            first.strategy,
            other.strategy,
            first.assigned_count as i64 - other.assigned_count as i64,
            first.mean_fixing_days - other.mean_fixing_days,
            first.overdue_pct - other.overdue_pct,
            mean(&first.slot_utilization_series) - mean(&other.slot_utilization_series)
        );
        for c in compare_pair(first, other) {
            match c.result {
                Some(w) => println!(
                    "  {} > : W+ = {}, n = {}, p = {:.4} ({})",
                    c.series,
                    w.w_plus,
                    w.n,
                    w.p_value,
                    if w.exact { "exact" } else { "normal approximation" }
                ),
                None => println!("  {} > : undefined, every paired difference is zero", c.series),
            }
        }
    }

    if let Some(path) = out {
        write_reports_csv(fs::File::create(path).or_exit(Status::Io)?, &reports).or_exit(Status::Io)?;
    }
    Ok(())
}

pub fn synth(config: &Config, settings: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut synth = match settings {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).or_exit(Status::Usage)?;
            let parsed = if path.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(anyhow::Error::from)
            } else {
                toml::from_str(&text).map_err(anyhow::Error::from)
            };
            parsed.with_context(|| format!("parsing {}", path.display())).or_exit(Status::Usage)?
        }
        None => SynthConfig { seed: config.seed, ..Default::default() },
    };
    if let Some(s) = seed {
        synth.seed = s;
    }
    let corpus = generate(&synth);
    let dataset = build_dataset(&config.project, &corpus.events, corpus.train_window, corpus.test_window).or_exit(Status::Ingest)?;
    save_dataset(&dataset, out)
}

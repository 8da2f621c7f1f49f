use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triage_core::config::{SvmConfig, TopicConfig};
use triage_core::ilp::{solve, SolveOptions};
use triage_core::ingest::EventKind;
use triage_core::model::Calendar;
use triage_core::par::Execution;
use triage_core::strategies::{build_sdabt, Compilation, InstanceBug, InstanceDeveloper, TriageInstance};
use triage_core::synth::{generate, SynthConfig};
use triage_core::textmine::{fit_topics, preprocess, Corpus, SuitabilityModel, TfIdf};
use triage_core::{BugId, DevId};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

struct Training {
    corpus: Corpus,
    docs: Vec<Vec<String>>,
    labels: Vec<DevId>,
    developers: Vec<DevId>,
}

fn training_set() -> Training {
    let synth = generate(&SynthConfig { train_bugs: 300, test_bugs: 0, test_days: 1, ..Default::default() });
    let mut texts = Vec::new();
    let mut labels = Vec::new();
    for e in &synth.events {
        match &e.kind {
            EventKind::Reported { summary, description, .. } => texts.push((e.bug, preprocess(summary, description))),
            EventKind::Assigned { developer } => labels.push(developer.clone()),
            _ => {}
        }
    }
    let corpus = Corpus::new(texts);
    let docs = corpus.documents.iter().map(|(_, d)| d.clone()).collect();
    Training { corpus, docs, labels, developers: synth.developers }
}

fn topics(c: &mut Criterion) {
    let t = training_set();
    let encoded = t.corpus.encoded();
    let config = TopicConfig { candidates: (2, 6), burn_in: 100, samples: 20, ..Default::default() };
    let mut g = c.benchmark_group("topic_selection");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_topics(black_box(&encoded), &t.corpus.vocabulary, &config, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn suitability(c: &mut Criterion) {
    let t = training_set();
    let config = SvmConfig { max_epochs: 200, ..Default::default() };
    let mut g = c.benchmark_group("svm_training");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let tfidf = TfIdf::fit(&t.corpus.vocabulary, &t.docs);
                SuitabilityModel::train(tfidf, black_box(&t.docs), &t.labels, &t.developers, &config, 7, exec).unwrap()
            })
        });
    }
    g.finish();
}

/// A crowded day: more bugs than free slot-days, some of them chained.
fn crowded_instance() -> TriageInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let horizon = 4;
    let developers =
        (0..3).map(|d| InstanceDeveloper::new(DevId::new(format!("d{d}")), Calendar::free(2, horizon))).collect::<Vec<_>>();
    let bugs = (0..9)
        .map(|i| InstanceBug {
            id: BugId(i as u64 + 1),
            suitability: (0..3).map(|_| rng.gen_range(0.1..1.0)).collect(),
            cost: (0..3).map(|_| rng.gen_range(1..=3)).collect(),
            open_parents: if i > 2 && rng.gen_bool(0.3) { vec![i - 3] } else { Vec::new() },
            ledger_parents: Vec::new(),
            ground_truth: None,
        })
        .collect();
    TriageInstance { day: 0, horizon, alpha: 0.5, developers, bugs }
}

fn solver(c: &mut Criterion) {
    let program = build_sdabt(&crowded_instance(), Compilation::Eliminated).program;
    let mut g = c.benchmark_group("solver_split");
    g.sample_size(10);
    for (name, exec) in MODES {
        let options = SolveOptions { split_depth: 4, execution: exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solve(black_box(&program), &options).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, topics, suitability, solver);
criterion_main!(benches);

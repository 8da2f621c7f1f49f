use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triage_core::config::{SvmConfig, TopicConfig};
use triage_core::par::Execution;
use triage_core::textmine::{fit_topics, Corpus, CostMatrix, FixObservation, SuitabilityModel, TfIdf, SCORE_EPSILON};
use triage_core::{BugId, DevId};

fn toks(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

/// Documents drawn from three vocabularies that share no word.
fn three_topic_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..90)
        .map(|i| {
            let topic = i % 3;
            let words = (0..25).map(|_| format!("t{topic}w{}", rng.gen_range(0..12))).collect();
            (BugId(i as u64), words)
        })
        .collect();
    Corpus::new(docs)
}

#[test]
fn arun_recovers_three_disjoint_topics() {
    let corpus = three_topic_corpus(11);
    let config = TopicConfig { burn_in: 200, samples: 50, ..Default::default() };
    let sel = fit_topics(&corpus.encoded(), &corpus.vocabulary, &config, 42, Execution::Parallel).unwrap();
    assert_eq!(sel.model.k, 3, "divergences: {:?}", sel.divergences);
    for row in sel.model.doc_topic.iter().chain(&sel.model.topic_word) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn topic_selection_same_in_both_modes() {
    let corpus = three_topic_corpus(5);
    let config = TopicConfig { burn_in: 30, samples: 5, candidates: (2, 4), ..Default::default() };
    let a = fit_topics(&corpus.encoded(), &corpus.vocabulary, &config, 9, Execution::Parallel).unwrap();
    let b = fit_topics(&corpus.encoded(), &corpus.vocabulary, &config, 9, Execution::Sequential).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.divergences, b.divergences);
}

fn separable() -> (Vec<Vec<String>>, Vec<DevId>) {
    let docs = vec![
        toks(&["parser", "token"]),
        toks(&["parser", "grammar"]),
        toks(&["token", "grammar", "parser"]),
        toks(&["render", "pixel"]),
        toks(&["pixel", "font"]),
        toks(&["render", "font", "pixel"]),
        toks(&["socket", "timeout"]),
        toks(&["socket", "proxy"]),
    ];
    let labels = ["ann", "ann", "ann", "bob", "bob", "bob", "cat", "cat"].iter().map(|d| DevId::new(*d)).collect();
    (docs, labels)
}

fn train(docs: &[Vec<String>], labels: &[DevId], config: &SvmConfig) -> SuitabilityModel {
    let corpus = Corpus::new(docs.iter().enumerate().map(|(i, d)| (BugId(i as u64), d.clone())).collect());
    let tfidf = TfIdf::fit(&corpus.vocabulary, docs);
    let devs: Vec<DevId> = ["ann", "bob", "cat"].iter().map(|d| DevId::new(*d)).collect();
    SuitabilityModel::train(tfidf, docs, labels, &devs, config, 1, Execution::Sequential).unwrap()
}

#[test]
fn separable_training_documents_are_recovered() {
    let (docs, labels) = separable();
    let m = train(&docs, &labels, &SvmConfig::default());
    for (d, l) in docs.iter().zip(&labels) {
        assert_eq!(m.predict(d), Some(l));
        let s = m.suitability_scores(d);
        assert!(s.iter().all(|&x| x >= SCORE_EPSILON - 1e-15));
    }
}

#[test]
fn single_class_is_rejected() {
    let docs = vec![toks(&["a"]), toks(&["b"])];
    let labels = vec![DevId::new("ann"), DevId::new("ann")];
    let corpus = Corpus::new(docs.iter().enumerate().map(|(i, d)| (BugId(i as u64), d.clone())).collect());
    let tfidf = TfIdf::fit(&corpus.vocabulary, &docs);
    let devs = vec![DevId::new("ann"), DevId::new("bob")];
    assert!(SuitabilityModel::train(tfidf, &docs, &labels, &devs, &SvmConfig::default(), 1, Execution::Sequential).is_err());
}

#[test]
fn empty_and_unknown_tokens() {
    let (docs, labels) = separable();
    let m = train(&docs, &labels, &SvmConfig::default());
    let empty = m.suitability_scores(&[]);
    assert!(empty.windows(2).all(|w| w[0] == w[1]) && empty[0] > 0.0);
    let base = m.suitability_scores(&toks(&["parser"]));
    assert_eq!(m.suitability_scores(&toks(&["parser", "zzzunknown"])), base);
}

#[test]
fn duplicating_documents_at_half_penalty_keeps_the_boundary() {
    let (docs, labels) = separable();
    let tight = SvmConfig { c: 1000.0, max_epochs: 200_000, tolerance: 1e-10 };
    let once = train(&docs, &labels, &tight);
    let twice_docs: Vec<Vec<String>> = docs.iter().chain(&docs).cloned().collect();
    let twice_labels: Vec<DevId> = labels.iter().chain(&labels).cloned().collect();
    let corpus = Corpus::new(docs.iter().enumerate().map(|(i, d)| (BugId(i as u64), d.clone())).collect());
    // idf must be the one of the original corpus for the features to match
    let tfidf = TfIdf::fit(&corpus.vocabulary, &docs);
    let devs: Vec<DevId> = ["ann", "bob", "cat"].iter().map(|d| DevId::new(*d)).collect();
    let half = SvmConfig { c: 500.0, ..tight };
    let twice = SuitabilityModel::train(tfidf, &twice_docs, &twice_labels, &devs, &half, 1, Execution::Sequential).unwrap();
    for (a, b) in once.classifiers.iter().zip(&twice.classifiers) {
        assert!((a.bias - b.bias).abs() < 1e-6);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}

#[test]
fn argmax_is_stable_under_document_shuffles() {
    let (docs, labels) = separable();
    let held_out = [(toks(&["grammar", "token"]), "ann"), (toks(&["font", "render"]), "bob"), (toks(&["proxy", "timeout"]), "cat")];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs: Vec<(Vec<String>, DevId)> = docs.into_iter().zip(labels).collect();
    for _ in 0..20 {
        pairs.shuffle(&mut rng);
        let (d, l): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
        let m = train(&d, &l, &SvmConfig::default());
        for (doc, want) in &held_out {
            assert_eq!(m.predict(doc).map(|d| d.as_str()), Some(*want));
        }
    }
}

#[test]
fn twin_developer_fills_the_gap() {
    let devs: Vec<DevId> = ["d", "twin", "other"].iter().map(|d| DevId::new(*d)).collect();
    let obs = |d: &str, k: usize, days: f64| FixObservation { developer: DevId::new(d), topic: k, days };
    let history = vec![
        obs("d", 0, 2.0),
        obs("d", 1, 7.0),
        obs("twin", 0, 2.0),
        obs("twin", 1, 7.0),
        obs("twin", 2, 5.0),
        obs("other", 0, 9.0),
        obs("other", 1, 1.0),
        obs("other", 2, 12.0),
    ];
    let m = CostMatrix::build(&devs, 3, &history, 1).unwrap();
    assert!(m.imputed[0][2]);
    assert!((m.entries[0][2] - 5.0).abs() < 1e-12);
    assert!(m.entries.iter().flatten().all(|&c| c >= 1.0));
}

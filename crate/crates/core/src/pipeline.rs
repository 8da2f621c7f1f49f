//! Training on the first window and forecasting the second.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Config, Horizon};
use crate::ingest::{auto_horizon, build_records, component_experience, estimate_slot_counts, Dataset, EventKind, RawEvent};
use crate::metrics::Experience;
use crate::model::BugRecord;
use crate::sim::{BugForecast, DeveloperSetup, Scenario};
use crate::textmine::{
    fit_topics, preprocess, CostError, CostMatrix, Corpus, FixObservation, SuitabilityModel, SvmError, TfIdf, TopicError, TopicModel,
};
use crate::{BugId, Day};

/// Bumped whenever the serialized layout of [`TrainedModels`] changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("the training window holds no usable fixed bug")]
    EmptyTraining,
    #[error("suitability model")]
    Svm(#[from] SvmError),
    #[error("topic model")]
    Topics(#[from] TopicError),
    #[error("cost model")]
    Cost(#[from] CostError),
    #[error("model file has format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("model file")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModels {
    pub version: u32,
    pub project: String,
    pub seed: u64,
    pub train_window: (Day, Day),
    pub developers: Vec<DeveloperSetup>,
    pub horizon: usize,
    pub suitability: SuitabilityModel,
    pub topics: TopicModel,
    /// Divergence of every topic count that was tried.
    pub topic_divergences: Vec<(usize, f64)>,
    pub costs: CostMatrix,
    pub experience: Experience,
    pub fold_in_iterations: usize,
}

fn usable(b: &BugRecord) -> bool {
    b.actual_assignee.is_some() && b.ground_truth_duration().is_some()
}

fn tokens_of(events: &[RawEvent]) -> BTreeMap<BugId, (Vec<String>, String)> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Reported { summary, description, component } => Some((e.bug, (preprocess(summary, description), component.clone()))),
            _ => None,
        })
        .collect()
}

/// Fits every model on the training window of `dataset`.
pub fn train(config: &Config, dataset: &Dataset) -> Result<TrainedModels, PipelineError> {
    let events = dataset.training_events();
    let records = build_records(&events);
    let bugs: Vec<&BugRecord> = records.values().filter(|b| usable(b)).collect();
    if bugs.is_empty() {
        return Err(PipelineError::EmptyTraining);
    }
    let mut developer_ids: Vec<_> = dataset.manifest.plan.active_developers.iter().cloned().collect();
    for b in &bugs {
        let d = b.actual_assignee.as_ref().expect("usable");
        if !developer_ids.contains(d) {
            developer_ids.push(d.clone());
        }
    }
    developer_ids.sort();

    let text = tokens_of(&events);
    let corpus = Corpus::new(bugs.iter().map(|b| (b.id, text.get(&b.id).map(|t| t.0.clone()).unwrap_or_default())).collect());
    let docs: Vec<Vec<String>> = corpus.documents.iter().map(|(_, d)| d.clone()).collect();
    let labels: Vec<_> = bugs.iter().map(|b| b.actual_assignee.clone().expect("usable")).collect();
    let tfidf = TfIdf::fit(&corpus.vocabulary, &docs);
    let suitability = SuitabilityModel::train(tfidf, &docs, &labels, &developer_ids, &config.svm, config.seed, config.execution)?;

    let selection = fit_topics(&corpus.encoded(), &corpus.vocabulary, &config.topics, config.seed, config.execution)?;
    let history: Vec<FixObservation> = bugs
        .iter()
        .zip(&selection.model.doc_topic)
        .map(|(b, theta)| FixObservation {
            developer: b.actual_assignee.clone().expect("usable"),
            topic: TopicModel::dominant_topic(theta),
            days: b.ground_truth_duration().expect("usable") as f64,
        })
        .collect();
    let costs = CostMatrix::build(&developer_ids, selection.model.k, &history, config.cf_neighbors)?;

    let active = developer_ids.iter().cloned().collect();
    let slots = estimate_slot_counts(bugs.iter().copied(), dataset.manifest.train_window, &active);
    let developers = developer_ids.iter().map(|d| DeveloperSetup { id: d.clone(), slot_count: slots[d] }).collect();
    let horizon = match config.horizon {
        Horizon::Days(n) => n,
        Horizon::Auto => {
            let times: Vec<f64> = bugs.iter().filter_map(|b| b.ground_truth_duration()).map(f64::from).collect();
            auto_horizon(&times)
        }
    };
    Ok(TrainedModels {
        version: MODEL_FORMAT_VERSION,
        project: config.project.clone(),
        seed: config.seed,
        train_window: dataset.manifest.train_window,
        developers,
        horizon,
        suitability,
        topics: selection.model,
        topic_divergences: selection.divergences,
        costs,
        experience: component_experience(bugs.iter().copied()),
        fold_in_iterations: config.topics.fold_in_iterations,
    })
}

impl TrainedModels {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.version != MODEL_FORMAT_VERSION {
            return Err(PipelineError::Version { found: header.version, expected: MODEL_FORMAT_VERSION });
        }
        Ok(serde_json::from_str(text)?)
    }

    /// Suitability and cost forecast for one bug text.
    pub fn forecast(&self, tokens: &[String], component: &str) -> BugForecast {
        let theta = self.topics.infer(tokens, self.fold_in_iterations);
        let k = TopicModel::dominant_topic(&theta);
        BugForecast {
            component: component.to_string(),
            suitability: self.suitability.suitability_scores(tokens),
            cost: (0..self.developers.len()).map(|d| self.costs.days(d, k)).collect(),
        }
    }

    /// Replay scenario over `window` built from the dataset's events.
    pub fn scenario(&self, dataset: &Dataset, window: (Day, Day)) -> Scenario {
        let events = dataset.events_in(window);
        let forecasts = tokens_of(&events).into_iter().map(|(bug, (tokens, component))| (bug, self.forecast(&tokens, &component))).collect();
        Scenario { developers: self.developers.clone(), forecasts, events, window }
    }
}

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::estimate::EmptyHistory;
use super::events::{read_jsonl, write_jsonl, EventLogError, RawEvent};
use super::filters::{apply_filters, derive_plan, FilterPlan, StageCounts};
use crate::Day;

pub const EVENTS_FILE: &str = "events.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub project: String,
    pub train_window: (Day, Day),
    pub test_window: (Day, Day),
    pub train_counts: StageCounts,
    pub test_counts: StageCounts,
    pub plan: FilterPlan,
}

/// A cleaned event log covering both windows, plus its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub events: Vec<RawEvent>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Empty(#[from] EmptyHistory),
    #[error(transparent)]
    Log(#[from] EventLogError),
    #[error("i/o error")]
    Io(#[from] std::io::Error),
    #[error("manifest")]
    Manifest(#[from] serde_json::Error),
    #[error("training and test windows overlap or are reversed")]
    Windows,
}

/// Splits events by the report day of their bug, derives the filter plan
/// from the training window and filters both windows with it.
pub fn build_dataset(project: &str, events: &[RawEvent], train: (Day, Day), test: (Day, Day)) -> Result<Dataset, DatasetError> {
    if train.0 > train.1 || test.0 > test.1 || train.1 >= test.0 {
        return Err(DatasetError::Windows);
    }
    let report: std::collections::HashMap<_, _> = events.iter().filter(|e| e.is_reported()).map(|e| (e.bug, e.day)).collect();
    let in_window = |w: (Day, Day)| -> Vec<RawEvent> {
        events.iter().filter(|e| report.get(&e.bug).is_some_and(|&d| d >= w.0 && d <= w.1)).cloned().collect()
    };
    let train_events = in_window(train);
    let test_events = in_window(test);
    let plan = derive_plan(&train_events)?;
    let (mut clean, train_counts) = apply_filters(&train_events, &plan);
    let (clean_test, test_counts) = apply_filters(&test_events, &plan);
    clean.extend(clean_test);
    super::events::sort_events(&mut clean);
    Ok(Dataset {
        manifest: DatasetManifest { project: project.to_string(), train_window: train, test_window: test, train_counts, test_counts, plan },
        events: clean,
    })
}

impl Dataset {
    pub fn save(&self, dir: &Path) -> Result<(), DatasetError> {
        fs::create_dir_all(dir)?;
        write_jsonl(BufWriter::new(File::create(dir.join(EVENTS_FILE))?), &self.events)?;
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let events = read_jsonl(BufReader::new(File::open(dir.join(EVENTS_FILE))?))?;
        let manifest = serde_json::from_reader(BufReader::new(File::open(dir.join(MANIFEST_FILE))?))?;
        Ok(Dataset { manifest, events })
    }

    pub fn events_in(&self, window: (Day, Day)) -> Vec<RawEvent> {
        let report: std::collections::HashMap<_, _> = self.events.iter().filter(|e| e.is_reported()).map(|e| (e.bug, e.day)).collect();
        self.events.iter().filter(|e| report.get(&e.bug).is_some_and(|&d| d >= window.0 && d <= window.1)).cloned().collect()
    }

    pub fn training_events(&self) -> Vec<RawEvent> {
        self.events_in(self.manifest.train_window)
    }

    pub fn test_events(&self) -> Vec<RawEvent> {
        self.events_in(self.manifest.test_window)
    }
}

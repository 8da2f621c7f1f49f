use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{BugId, Day, DevId};

/// One lifecycle change of one bug, as replayed by the simulator.
///
/// Dependency events are recorded on the blocked bug and name the blocker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEvent {
    pub bug: BugId,
    pub day: Day,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Reported {
        summary: String,
        #[serde(default)]
        description: String,
        #[serde(default)]
        component: String,
    },
    DependencyAdded {
        blocker: BugId,
    },
    DependencyRemoved {
        blocker: BugId,
    },
    Assigned {
        developer: DevId,
    },
    Fixed,
    Reopened,
    MetaFlagged,
}

impl RawEvent {
    pub fn new(bug: BugId, day: Day, kind: EventKind) -> Self {
        RawEvent { bug, day, kind }
    }

    pub fn is_reported(&self) -> bool {
        matches!(self.kind, EventKind::Reported { .. })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EventLogError {
    #[error("i/o error")]
    Io(#[from] std::io::Error),
    #[error("line {line}")]
    Json { line: usize, source: serde_json::Error },
}

/// Sorts events by day, keeping the original order within a day.
pub fn sort_events(events: &mut [RawEvent]) {
    events.sort_by_key(|e| e.day);
}

pub fn write_jsonl<W: Write>(mut out: W, events: &[RawEvent]) -> Result<(), EventLogError> {
    for e in events {
        serde_json::to_writer(&mut out, e).map_err(|source| EventLogError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<RawEvent>, EventLogError> {
    let mut events = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|source| EventLogError::Json { line: n + 1, source })?);
    }
    Ok(events)
}

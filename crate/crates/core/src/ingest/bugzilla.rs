//! Bugzilla REST client and archived-dump reader.
//!
//! Both paths produce the same [`RawEvent`] stream. Network access goes
//! through the [`Transport`] trait so tests can substitute canned responses,
//! and [`Cached`] stores every response verbatim for offline reruns.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use chrono::NaiveDate;
use reqwest::Url;
use serde::Deserialize;

use super::events::{sort_events, EventKind, RawEvent};
use crate::par::{self, Execution};
use crate::{BugId, Day, DevId};

const PAGE_SIZE: usize = 500;

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    Network(String),
    #[error("request was not authorized (check the API key)")]
    Unauthorized,
    #[error("rate limited by the server")]
    RateLimited,
    #[error("malformed record{}: {reason}", bug.map(|b| format!(" for bug {b}")).unwrap_or_default())]
    Malformed { bug: Option<BugId>, reason: String },
    #[error("cache i/o error")]
    Io(#[from] std::io::Error),
}

impl FetchError {
    fn retryable(&self) -> bool {
        matches!(self, FetchError::Network(_) | FetchError::RateLimited)
    }
}

pub trait Transport: Sync {
    fn get(&self, url: &str) -> Result<String, FetchError>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
    token: Option<String>,
}

impl HttpTransport {
    pub fn new(token: Option<String>) -> Result<Self, FetchError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        Ok(HttpTransport { client, token })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, FetchError> {
        let mut request = self.client.get(url);
        if let Some(token) = &self.token {
            request = request.header("X-BUGZILLA-API-KEY", token);
        }
        let response = request.send().map_err(|e| FetchError::Network(e.to_string()))?;
        match response.status().as_u16() {
            401 | 403 => Err(FetchError::Unauthorized),
            429 => Err(FetchError::RateLimited),
            s if !(200..300).contains(&s) => Err(FetchError::Network(format!("HTTP {s} for {url}"))),
            _ => response.text().map_err(|e| FetchError::Network(e.to_string())),
        }
    }
}

/// Retries transient failures with exponential backoff.
pub struct Retrying<T> {
    inner: T,
    retries: u32,
    backoff: Duration,
}

impl<T: Transport> Retrying<T> {
    pub fn new(inner: T, retries: u32, backoff: Duration) -> Self {
        Retrying { inner, retries, backoff }
    }
}

impl<T: Transport> Transport for Retrying<T> {
    fn get(&self, url: &str) -> Result<String, FetchError> {
        let mut attempt = 0;
        loop {
            match self.inner.get(url) {
                Err(e) if e.retryable() && attempt < self.retries => {
                    log::warn!("{e}; retrying {url}");
                    thread::sleep(self.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Serves responses from `dir` when present, otherwise fetches and stores
/// them.
pub struct Cached<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> Cached<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        Cached { inner, dir: dir.into() }
    }

    fn path_for(&self, url: &str) -> PathBuf {
        let key: String = url.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        self.dir.join(format!("{key}.json"))
    }
}

impl<T: Transport> Transport for Cached<T> {
    fn get(&self, url: &str) -> Result<String, FetchError> {
        let path = self.path_for(url);
        if let Ok(body) = fs::read_to_string(&path) {
            return Ok(body);
        }
        let body = self.inner.get(url)?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("part");
        fs::write(&tmp, &body)?;
        fs::rename(&tmp, &path)?;
        Ok(body)
    }
}

/// Transport that never reaches the network; every request must already be
/// cached.
pub struct Offline;

impl Transport for Offline {
    fn get(&self, url: &str) -> Result<String, FetchError> {
        Err(FetchError::Network(format!("offline and not cached: {url}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BugSummary {
    pub id: u64,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub component: String,
    pub creation_time: String,
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct HistoryEntry {
    pub when: String,
    #[serde(default)]
    pub changes: Vec<Change>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Change {
    pub field_name: String,
    #[serde(default)]
    pub removed: String,
    #[serde(default)]
    pub added: String,
}

#[derive(Deserialize)]
struct BugList {
    bugs: Vec<BugSummary>,
}

#[derive(Deserialize)]
struct HistoryResponse {
    bugs: Vec<BugHistory>,
}

#[derive(Deserialize)]
struct BugHistory {
    #[serde(default)]
    history: Vec<HistoryEntry>,
}

#[derive(Deserialize)]
struct CommentResponse {
    bugs: std::collections::BTreeMap<String, CommentList>,
}

#[derive(Deserialize)]
struct CommentList {
    comments: Vec<Comment>,
}

#[derive(Deserialize)]
struct Comment {
    #[serde(default)]
    text: String,
}

/// One bug of an archived dump: the bug fields, its first comment and its
/// full change history.
#[derive(Debug, Clone, Deserialize)]
pub struct DumpBug {
    #[serde(flatten)]
    pub bug: BugSummary,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
}

#[derive(Deserialize)]
struct Dump {
    bugs: Vec<DumpBug>,
}

/// Maps timestamps to day indices counted from `epoch`.
#[derive(Debug, Clone, Copy)]
pub struct DayClock {
    epoch: NaiveDate,
}

impl DayClock {
    pub fn new(epoch: &str) -> Result<Self, FetchError> {
        let epoch = NaiveDate::parse_from_str(epoch, "%Y-%m-%d")
            .map_err(|e| FetchError::Malformed { bug: None, reason: format!("bad epoch `{epoch}`: {e}") })?;
        Ok(DayClock { epoch })
    }

    pub fn day(&self, timestamp: &str) -> Option<Day> {
        let date = NaiveDate::parse_from_str(timestamp.get(..10)?, "%Y-%m-%d").ok()?;
        Some((date - self.epoch).num_days())
    }

    pub fn date(&self, day: Day) -> NaiveDate {
        self.epoch + chrono::Duration::days(day)
    }
}

fn id_list(text: &str) -> impl Iterator<Item = u64> + '_ {
    text.split(|c: char| c == ',' || c.is_whitespace()).filter_map(|t| t.parse().ok())
}

fn is_meta(bug: &BugSummary) -> bool {
    bug.keywords.iter().any(|k| k.eq_ignore_ascii_case("meta")) || bug.summary.to_ascii_lowercase().contains("[meta]")
}

/// Converts one bug and its history into events. `blocks` changes are
/// emitted on the counterpart bug so every dependency event sits on the
/// blocked side.
pub fn bug_events(bug: &BugSummary, description: &str, history: &[HistoryEntry], clock: &DayClock) -> Result<Vec<RawEvent>, FetchError> {
    let id = BugId(bug.id);
    let malformed = |reason: String| FetchError::Malformed { bug: Some(id), reason };
    let reported = clock.day(&bug.creation_time).ok_or_else(|| malformed(format!("bad creation_time `{}`", bug.creation_time)))?;
    let mut events = vec![RawEvent::new(
        id,
        reported,
        EventKind::Reported { summary: bug.summary.clone(), description: description.to_string(), component: bug.component.clone() },
    )];
    if is_meta(bug) {
        events.push(RawEvent::new(id, reported, EventKind::MetaFlagged));
    }
    for entry in history {
        let day = clock.day(&entry.when).ok_or_else(|| malformed(format!("bad history timestamp `{}`", entry.when)))?;
        for change in &entry.changes {
            match change.field_name.as_str() {
                "assigned_to" if !change.added.is_empty() && !change.added.starts_with("nobody@") => {
                    events.push(RawEvent::new(id, day, EventKind::Assigned { developer: DevId::new(change.added.trim()) }));
                }
                "status" if change.added == "REOPENED" => events.push(RawEvent::new(id, day, EventKind::Reopened)),
                "resolution" if change.added == "FIXED" => events.push(RawEvent::new(id, day, EventKind::Fixed)),
                "keywords" if change.added.split([',', ' ']).any(|k| k.eq_ignore_ascii_case("meta")) => {
                    events.push(RawEvent::new(id, day, EventKind::MetaFlagged));
                }
                "depends_on" => {
                    for b in id_list(&change.added) {
                        events.push(RawEvent::new(id, day, EventKind::DependencyAdded { blocker: BugId(b) }));
                    }
                    for b in id_list(&change.removed) {
                        events.push(RawEvent::new(id, day, EventKind::DependencyRemoved { blocker: BugId(b) }));
                    }
                }
                "blocks" => {
                    for b in id_list(&change.added) {
                        events.push(RawEvent::new(BugId(b), day, EventKind::DependencyAdded { blocker: id }));
                    }
                    for b in id_list(&change.removed) {
                        events.push(RawEvent::new(BugId(b), day, EventKind::DependencyRemoved { blocker: id }));
                    }
                }
                _ => {}
            }
        }
    }
    Ok(events)
}

/// Orders events by day and drops dependency events recorded on both
/// sides of a link.
fn finish(mut events: Vec<RawEvent>) -> Vec<RawEvent> {
    sort_events(&mut events);
    let mut seen = std::collections::HashSet::new();
    events.retain(|e| match &e.kind {
        EventKind::DependencyAdded { blocker } => seen.insert((e.bug, *blocker, e.day, true)),
        EventKind::DependencyRemoved { blocker } => seen.insert((e.bug, *blocker, e.day, false)),
        _ => true,
    });
    events
}

fn parse<T: serde::de::DeserializeOwned>(body: &str, bug: Option<BugId>) -> Result<T, FetchError> {
    serde_json::from_str(body).map_err(|e| FetchError::Malformed { bug, reason: e.to_string() })
}

fn endpoint(base: &str, path: &str, params: &[(&str, String)]) -> Result<String, FetchError> {
    let joined = format!("{}/rest/{path}", base.trim_end_matches('/'));
    Url::parse_with_params(&joined, params)
        .map(String::from)
        .map_err(|e| FetchError::Malformed { bug: None, reason: format!("bad endpoint `{joined}`: {e}") })
}

/// Downloads every bug of `product` reported inside `window` together with
/// its history and description. History requests run with at most
/// `concurrency` in flight.
pub fn fetch_project(
    transport: &dyn Transport,
    base: &str,
    product: &str,
    window: (Day, Day),
    clock: &DayClock,
    concurrency: usize,
) -> Result<Vec<RawEvent>, FetchError> {
    let mut bugs = Vec::new();
    for page in 0.. {
        let url = endpoint(
            base,
            "bug",
            &[
                ("product", product.to_string()),
                ("creation_time", clock.date(window.0).to_string()),
                ("include_fields", "id,summary,component,creation_time,keywords".into()),
                ("limit", PAGE_SIZE.to_string()),
                ("offset", (page * PAGE_SIZE).to_string()),
            ],
        )?;
        let list: BugList = parse(&transport.get(&url)?, None)?;
        let n = list.bugs.len();
        bugs.extend(list.bugs);
        if n < PAGE_SIZE {
            break;
        }
    }
    bugs.retain(|b| clock.day(&b.creation_time).is_some_and(|d| d >= window.0 && d <= window.1));
    bugs.sort_by_key(|b| b.id);

    let per_bug = par::with_thread_cap(concurrency, || {
        par::map(Execution::Parallel, &bugs, |bug| -> Result<Vec<RawEvent>, FetchError> {
            let id = Some(BugId(bug.id));
            let history: HistoryResponse = parse(&transport.get(&endpoint(base, &format!("bug/{}/history", bug.id), &[])?)?, id)?;
            let comments: CommentResponse = parse(&transport.get(&endpoint(base, &format!("bug/{}/comment", bug.id), &[])?)?, id)?;
            let description = comments.bugs.get(&bug.id.to_string()).and_then(|c| c.comments.first()).map(|c| c.text.clone()).unwrap_or_default();
            let history = history.bugs.into_iter().next().map(|h| h.history).unwrap_or_default();
            bug_events(bug, &description, &history, clock)
        })
    });
    let mut events = Vec::new();
    for e in per_bug {
        events.extend(e?);
    }
    Ok(finish(events))
}

/// Reads an archived dump (`{"bugs": [...]}` with inline history) and keeps
/// the bugs reported inside `window`.
pub fn load_dump<R: Read>(reader: R, window: (Day, Day), clock: &DayClock) -> Result<Vec<RawEvent>, FetchError> {
    let dump: Dump = serde_json::from_reader(reader).map_err(|e| FetchError::Malformed { bug: None, reason: e.to_string() })?;
    let mut bugs = dump.bugs;
    bugs.sort_by_key(|b| b.bug.id);
    let mut events = Vec::new();
    for b in &bugs {
        let Some(day) = clock.day(&b.bug.creation_time) else {
            return Err(FetchError::Malformed { bug: Some(BugId(b.bug.id)), reason: format!("bad creation_time `{}`", b.bug.creation_time) });
        };
        if day >= window.0 && day <= window.1 {
            events.extend(bug_events(&b.bug, &b.description, &b.history, clock)?);
        }
    }
    Ok(finish(events))
}

//! Synthetic issue-tracker histories with known topics, developer skills
//! and fixing costs.
//!
//! A few "star" developers receive most historical assignments across many
//! topics at a moderate cost, while specialists are fast on one topic and
//! slow elsewhere. Some bugs are planted as blocked by recent earlier bugs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{EventKind, RawEvent};
use crate::sim::{BugForecast, DeveloperSetup, Scenario};
use crate::{BugId, Day, DevId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub topics: usize,
    pub stars: usize,
    pub specialists_per_topic: usize,
    /// Bugs reported in the training window.
    pub train_bugs: usize,
    /// Bugs reported in the test window.
    pub test_bugs: usize,
    pub train_days: Day,
    pub test_days: Day,
    pub words_per_topic: usize,
    pub words_per_bug: usize,
    /// Chance that a bug is blocked by an earlier, still recent bug.
    pub dependency_rate: f64,
    /// Historical share of assignments that go to a star developer.
    pub star_share: f64,
    /// Stars' fixing days on any topic.
    pub star_cost: (u32, u32),
    /// Specialists' fixing days on their own topic.
    pub specialist_cost: (u32, u32),
    /// Specialists' fixing days on other topics.
    pub off_topic_cost: (u32, u32),
    /// Most bugs a developer works on at once in the recorded history.
    pub parallel_work: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            topics: 4,
            stars: 1,
            specialists_per_topic: 2,
            train_bugs: 500,
            test_bugs: 500,
            train_days: 200,
            test_days: 50,
            words_per_topic: 30,
            words_per_bug: 24,
            dependency_rate: 0.25,
            star_share: 0.7,
            star_cost: (3, 5),
            specialist_cost: (1, 2),
            off_topic_cost: (6, 9),
            parallel_work: 3,
        }
    }
}

/// A generated history plus the ground truth behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub events: Vec<RawEvent>,
    pub train_window: (Day, Day),
    pub test_window: (Day, Day),
    pub developers: Vec<DevId>,
    pub topic_of: BTreeMap<BugId, usize>,
    /// True fixing days per developer and topic.
    pub cost: Vec<Vec<u32>>,
    /// True affinity per developer and topic, in `(0, 1]`.
    pub skill: Vec<Vec<f64>>,
}

/// Pronounceable letters-only word for index `n`, so that tokenization keeps
/// it intact.
fn pseudo_word(mut n: usize) -> String {
    const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut w = String::from("z");
    for _ in 0..3 {
        w.push_str(ONSETS[n % ONSETS.len()]);
        n /= ONSETS.len();
        w.push_str(VOWELS[n % VOWELS.len()]);
        n /= VOWELS.len();
    }
    w
}

pub fn generate(config: &SynthConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = config.topics.max(1);
    let specialists = k * config.specialists_per_topic;
    let n_devs = config.stars + specialists;
    let developers: Vec<DevId> = (0..config.stars)
        .map(|s| DevId::new(format!("star{s}")))
        .chain((0..specialists).map(|s| DevId::new(format!("specialist{}_{}", s / config.specialists_per_topic.max(1), s % config.specialists_per_topic.max(1)))))
        .collect();
    let home = |d: usize| (d >= config.stars).then(|| (d - config.stars) / config.specialists_per_topic.max(1));
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)| rng.gen_range(lo..=hi.max(lo));
    let mut cost = vec![vec![0; k]; n_devs];
    let mut skill = vec![vec![0.0; k]; n_devs];
    for d in 0..n_devs {
        for t in 0..k {
            let (c, s) = match home(d) {
                None => (draw(&mut rng, config.star_cost), 0.9),
                Some(h) if h == t => (draw(&mut rng, config.specialist_cost), 0.5),
                Some(_) => (draw(&mut rng, config.off_topic_cost), 0.05),
            };
            cost[d][t] = c;
            skill[d][t] = s;
        }
    }

    let total = config.train_bugs + config.test_bugs;
    let mut reports: Vec<Day> = (0..config.train_bugs).map(|_| rng.gen_range(0..config.train_days.max(1))).collect();
    reports.extend((0..config.test_bugs).map(|_| config.train_days + rng.gen_range(0..config.test_days.max(1))));
    reports.sort();

    let mut events = Vec::new();
    let mut topic_of = BTreeMap::new();
    let mut busy: Vec<Vec<Day>> = vec![Vec::new(); n_devs];
    let mut fixed_on: Vec<Day> = Vec::with_capacity(total);
    for (i, &report) in reports.iter().enumerate() {
        let id = BugId(i as u64 + 1);
        let topic = rng.gen_range(0..k);
        topic_of.insert(id, topic);
        let words: Vec<String> =
            (0..config.words_per_bug).map(|_| pseudo_word(topic * config.words_per_topic + rng.gen_range(0..config.words_per_topic))).collect();
        let (summary, description) = words.split_at(words.len().min(6));
        events.push(RawEvent::new(
            id,
            report,
            EventKind::Reported { summary: summary.join(" "), description: description.join(" "), component: format!("component-{topic}") },
        ));

        let mut earliest = report + rng.gen_range(0..=2);
        if i > 0 && rng.gen_bool(config.dependency_rate) {
            let lo = i.saturating_sub(15);
            let blocker = rng.gen_range(lo..i);
            events.push(RawEvent::new(id, report, EventKind::DependencyAdded { blocker: BugId(blocker as u64 + 1) }));
            earliest = earliest.max(fixed_on[blocker].min(report + 10));
        }

        let roll: f64 = rng.gen();
        let dev = if roll < config.star_share && config.stars > 0 {
            (topic % config.stars.max(1)).min(config.stars - 1)
        } else if roll < config.star_share + (1.0 - config.star_share) * 0.7 && config.specialists_per_topic > 0 {
            config.stars + topic * config.specialists_per_topic + rng.gen_range(0..config.specialists_per_topic)
        } else {
            *(0..n_devs).collect::<Vec<_>>().choose(&mut rng).expect("developers")
        };
        let noise: i64 = rng.gen_range(-1..=1);
        let duration = (cost[dev][topic] as i64 + noise).max(1);
        // wait until the developer has a free hand
        let mut assign = earliest;
        loop {
            busy[dev].retain(|&end| end >= assign);
            if busy[dev].len() < config.parallel_work.max(1) {
                break;
            }
            assign = *busy[dev].iter().min().expect("non-empty") + 1;
        }
        let fix = assign + duration - 1;
        busy[dev].push(fix);
        fixed_on.push(fix);
        events.push(RawEvent::new(id, assign, EventKind::Assigned { developer: developers[dev].clone() }));
        events.push(RawEvent::new(id, fix, EventKind::Fixed));
    }
    events.sort_by_key(|e| e.day);
    let train_window = (0, config.train_days - 1);
    let test_window = (config.train_days, config.train_days + config.test_days - 1);
    SyntheticCorpus { events, train_window, test_window, developers, topic_of, cost, skill }
}

impl SyntheticCorpus {
    /// A replay scenario over the test window that uses the true skills and
    /// costs instead of trained predictions.
    pub fn oracle_scenario(&self, slot_counts: &[usize]) -> Scenario {
        let window = self.test_window;
        let events: Vec<RawEvent> = self.events.iter().filter(|e| e.day >= window.0 && e.day <= window.1).cloned().collect();
        let forecasts = events
            .iter()
            .filter(|e| e.is_reported())
            .map(|e| {
                let t = self.topic_of[&e.bug];
                let f = BugForecast {
                    component: format!("component-{t}"),
                    suitability: self.skill.iter().map(|s| s[t]).collect(),
                    cost: self.cost.iter().map(|c| c[t]).collect(),
                };
                (e.bug, f)
            })
            .collect();
        let developers =
            self.developers.iter().zip(slot_counts).map(|(id, &slot_count)| DeveloperSetup { id: id.clone(), slot_count }).collect();
        Scenario { developers, forecasts, events, window }
    }
}

//! Developer-by-topic fixing-cost matrix with collaborative-filtering
//! imputation of unobserved entries.

use serde::{Deserialize, Serialize};

use crate::DevId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CostError {
    #[error("no fixing history to estimate costs from")]
    EmptyHistory,
}

/// One observed fix: who, on which topic, and how many days it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixObservation {
    pub developer: DevId,
    pub topic: usize,
    pub days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub developers: Vec<DevId>,
    /// `entries[d][k]` in days, at least 1.
    pub entries: Vec<Vec<f64>>,
    pub imputed: Vec<Vec<bool>>,
}

fn cosine(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    let mut any = false;
    for (x, y) in a.iter().zip(b) {
        if let (Some(x), Some(y)) = (x, y) {
            dot += x * y;
            na += x * x;
            nb += y * y;
            any = true;
        }
    }
    (any && na > 0.0 && nb > 0.0).then(|| dot / (na.sqrt() * nb.sqrt()))
}

impl CostMatrix {
    /// Averages observed fixing days per (developer, topic) and fills the
    /// gaps.
    ///
    /// A missing entry `(d, k)` is the similarity-weighted mean of the
    /// `neighbors` developers most similar to `d` (cosine over the topics
    /// both observed) among those who observed `k`. Without such neighbors
    /// it falls back to the mean over developers who observed `k`, then to
    /// the global mean. Observations for developers outside `developers`
    /// still count towards the fallbacks.
    pub fn build(developers: &[DevId], topics: usize, history: &[FixObservation], neighbors: usize) -> Result<Self, CostError> {
        if history.is_empty() {
            return Err(CostError::EmptyHistory);
        }
        let mut sums = vec![vec![(0.0, 0u32); topics]; developers.len()];
        let mut topic_sum = vec![(0.0, 0u32); topics];
        let mut global = (0.0, 0u32);
        for obs in history {
            if obs.topic >= topics {
                continue;
            }
            if let Some(d) = developers.iter().position(|x| *x == obs.developer) {
                sums[d][obs.topic].0 += obs.days;
                sums[d][obs.topic].1 += 1;
            }
            topic_sum[obs.topic].0 += obs.days;
            topic_sum[obs.topic].1 += 1;
            global.0 += obs.days;
            global.1 += 1;
        }
        if global.1 == 0 {
            return Err(CostError::EmptyHistory);
        }
        let observed: Vec<Vec<Option<f64>>> =
            sums.iter().map(|row| row.iter().map(|&(s, n)| (n > 0).then(|| s / n as f64)).collect()).collect();
        let global_mean = global.0 / global.1 as f64;

        let mut entries = vec![vec![0.0; topics]; developers.len()];
        let mut imputed = vec![vec![false; topics]; developers.len()];
        for d in 0..developers.len() {
            for k in 0..topics {
                let value = match observed[d][k] {
                    Some(v) => v,
                    None => {
                        imputed[d][k] = true;
                        let mut peers: Vec<(f64, usize, f64)> = (0..developers.len())
                            .filter(|&e| e != d)
                            .filter_map(|e| Some((cosine(&observed[d], &observed[e])?, e, observed[e][k]?)))
                            .filter(|&(s, _, _)| s > 0.0)
                            .collect();
                        peers.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                        peers.truncate(neighbors);
                        let weight: f64 = peers.iter().map(|p| p.0).sum();
                        if weight > 0.0 {
                            peers.iter().map(|p| p.0 * p.2).sum::<f64>() / weight
                        } else if topic_sum[k].1 > 0 {
                            topic_sum[k].0 / topic_sum[k].1 as f64
                        } else {
                            global_mean
                        }
                    }
                };
                entries[d][k] = value.max(1.0);
            }
        }
        Ok(CostMatrix { developers: developers.to_vec(), entries, imputed })
    }

    pub fn topics(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Whole days developer `d` needs for a bug of topic `k`.
    pub fn days(&self, d: usize, k: usize) -> u32 {
        self.entries[d][k].max(1.0).ceil() as u32
    }
}

//! One-vs-rest linear SVM with hinge loss, trained by dual coordinate
//! descent. The bias is an extra constant feature and is regularized along
//! with the weights, which keeps the optimum unique.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tfidf::{SparseVec, TfIdf};
use crate::config::SvmConfig;
use crate::par::{self, Execution};
use crate::DevId;

/// Added to shifted scores so the smallest one is still positive.
pub const SCORE_EPSILON: f64 = 1e-3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvmError {
    #[error("need documents for at least two developers, got {0}")]
    SingleClass(usize),
    #[error("training documents have no vocabulary")]
    EmptyVocabulary,
    #[error("{docs} documents but {labels} labels")]
    LabelMismatch { docs: usize, labels: usize },
}

/// A binary linear classifier `w . x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.iter().map(|&(i, v)| self.weights[i] * v).sum::<f64>() + self.bias
    }

    /// Trains on `xs` with labels `ys` in {-1, +1}.
    pub fn train(xs: &[SparseVec], ys: &[f64], dim: usize, config: &SvmConfig, seed: u64) -> Self {
        let c = config.c;
        let n = xs.len();
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut alpha = vec![0.0; n];
        let q: Vec<f64> = xs.iter().map(|x| x.iter().map(|(_, v)| v * v).sum::<f64>() + 1.0).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..config.max_epochs {
            order.shuffle(&mut rng);
            let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
            for &i in &order {
                let x = &xs[i];
                let y = ys[i];
                let g = y * (x.iter().map(|&(j, v)| w[j] * v).sum::<f64>() + b) - 1.0;
                let pg = if alpha[i] == 0.0 {
                    g.min(0.0)
                } else if alpha[i] == c {
                    g.max(0.0)
                } else {
                    g
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg.abs() > 1e-14 {
                    let old = alpha[i];
                    alpha[i] = (old - g / q[i]).clamp(0.0, c);
                    let step = (alpha[i] - old) * y;
                    for &(j, v) in x {
                        w[j] += step * v;
                    }
                    b += step;
                }
            }
            if pg_max - pg_min < config.tolerance {
                break;
            }
        }
        LinearSvm { weights: w, bias: b }
    }
}

/// Per-developer suitability classifiers over TF-IDF features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityModel {
    pub developers: Vec<DevId>,
    pub tfidf: TfIdf,
    pub classifiers: Vec<LinearSvm>,
    pub c: f64,
}

impl SuitabilityModel {
    /// Trains one classifier per entry of `developers`, in that order.
    /// Developers with no training document still get a classifier (trained
    /// on negatives only).
    pub fn train(
        tfidf: TfIdf,
        documents: &[Vec<String>],
        labels: &[DevId],
        developers: &[DevId],
        config: &SvmConfig,
        seed: u64,
        exec: Execution,
    ) -> Result<Self, SvmError> {
        if documents.len() != labels.len() {
            return Err(SvmError::LabelMismatch { docs: documents.len(), labels: labels.len() });
        }
        let with_docs = developers.iter().filter(|d| labels.contains(d)).count();
        if with_docs < 2 {
            return Err(SvmError::SingleClass(with_docs));
        }
        if tfidf.dim() == 0 {
            return Err(SvmError::EmptyVocabulary);
        }
        let xs: Vec<SparseVec> = documents.iter().map(|d| tfidf.transform(d)).collect();
        let classifiers = par::map_range(exec, developers.len(), |k| {
            let ys: Vec<f64> = labels.iter().map(|l| if *l == developers[k] { 1.0 } else { -1.0 }).collect();
            LinearSvm::train(&xs, &ys, tfidf.dim(), config, seed.wrapping_add(k as u64))
        });
        Ok(SuitabilityModel { developers: developers.to_vec(), tfidf, classifiers, c: config.c })
    }

    /// Raw decision values, one per developer.
    pub fn decision_scores(&self, tokens: &[String]) -> Vec<f64> {
        let x = self.tfidf.transform(tokens);
        self.classifiers.iter().map(|m| m.decision(&x)).collect()
    }

    /// Decision values shifted so the smallest is [`SCORE_EPSILON`]. A
    /// document with no known token gets the same score for everyone.
    pub fn suitability_scores(&self, tokens: &[String]) -> Vec<f64> {
        if self.tfidf.transform(tokens).is_empty() {
            return vec![SCORE_EPSILON; self.developers.len()];
        }
        shift_positive(&self.decision_scores(tokens))
    }

    pub fn predict(&self, tokens: &[String]) -> Option<&DevId> {
        let s = self.decision_scores(tokens);
        argmax(&s).map(|i| &self.developers[i])
    }
}

pub fn shift_positive(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    raw.iter().map(|&s| s - min + SCORE_EPSILON).collect()
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_scores_are_positive() {
        let s = shift_positive(&[-2.0, 0.5, 1.0]);
        assert!((s[0] - SCORE_EPSILON).abs() < 1e-15);
        assert!(s.iter().all(|&x| x > 0.0));
        assert_eq!(argmax(&s), Some(2));
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }
}

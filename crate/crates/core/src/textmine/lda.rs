//! Latent Dirichlet allocation by collapsed Gibbs sampling, with topic-count
//! selection by Arun's divergence.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::TopicConfig;
use crate::par::{self, Execution};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TopicError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("corpus has {distinct} distinct tokens, fewer than K = {k}")]
    Degenerate { distinct: usize, k: usize },
    #[error("K must be at least 2, got {0}")]
    TooFewTopics(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub vocabulary: BTreeMap<String, usize>,
    /// `k` rows over the vocabulary, each summing to 1.
    pub topic_word: Vec<Vec<f64>>,
    /// One row of `k` topic weights per training document, each summing to 1.
    pub doc_topic: Vec<Vec<f64>>,
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        for x in row.iter_mut() {
            *x /= s;
        }
    }
}

/// Fits `k` topics to `docs` (token indices below `vocabulary.len()`).
///
/// Runs `burn_in` sweeps and then averages the posterior-mean estimates of
/// `samples` further sweeps.
pub fn fit(docs: &[Vec<usize>], vocabulary: &BTreeMap<String, usize>, k: usize, config: &TopicConfig, seed: u64) -> Result<TopicModel, TopicError> {
    if k < 2 {
        return Err(TopicError::TooFewTopics(k));
    }
    let v = vocabulary.len();
    let mut distinct: Vec<usize> = docs.iter().flatten().copied().collect();
    if distinct.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < k {
        return Err(TopicError::Degenerate { distinct: distinct.len(), k });
    }
    let (alpha, beta) = (config.alpha, config.beta);
    let vbeta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut n_dk = vec![vec![0u32; k]; docs.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            doc.iter()
                .map(|&w| {
                    let t = rng.gen_range(0..k);
                    n_dk[d][t] += 1;
                    n_kw[t][w] += 1;
                    n_k[t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let mut phi = vec![vec![0.0; v]; k];
    let mut theta = vec![vec![0.0; k]; docs.len()];
    let mut p = vec![0.0; k];
    for sweep in 0..config.burn_in + config.samples.max(1) {
        for (d, doc) in docs.iter().enumerate() {
            for (n, &w) in doc.iter().enumerate() {
                let old = z[d][n];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (n_dk[d][t] as f64 + alpha) * (n_kw[t][w] as f64 + beta) / (n_k[t] as f64 + vbeta);
                    p[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = p.iter().position(|&c| u < c).unwrap_or(k - 1);
                z[d][n] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
        if sweep >= config.burn_in {
            for t in 0..k {
                let denom = n_k[t] as f64 + vbeta;
                for w in 0..v {
                    phi[t][w] += (n_kw[t][w] as f64 + beta) / denom;
                }
            }
            for (d, doc) in docs.iter().enumerate() {
                let denom = doc.len() as f64 + k as f64 * alpha;
                for t in 0..k {
                    theta[d][t] += (n_dk[d][t] as f64 + alpha) / denom;
                }
            }
        }
    }
    phi.iter_mut().for_each(|r| normalize(r));
    theta.iter_mut().for_each(|r| normalize(r));
    Ok(TopicModel { k, alpha, beta, seed, vocabulary: vocabulary.clone(), topic_word: phi, doc_topic: theta })
}

impl TopicModel {
    /// Topic weights of an unseen document with the topic-word rows held
    /// fixed. Unknown tokens are ignored; an empty document gets the uniform
    /// row.
    pub fn infer(&self, tokens: &[String], iterations: usize) -> Vec<f64> {
        let words: Vec<usize> = tokens.iter().filter_map(|t| self.vocabulary.get(t).copied()).collect();
        let mut theta = vec![1.0 / self.k as f64; self.k];
        if words.is_empty() {
            return theta;
        }
        let mut acc = vec![0.0; self.k];
        for _ in 0..iterations.max(1) {
            acc.iter_mut().for_each(|a| *a = self.alpha);
            for &w in &words {
                let norm: f64 = (0..self.k).map(|t| self.topic_word[t][w] * theta[t]).sum();
                for t in 0..self.k {
                    acc[t] += self.topic_word[t][w] * theta[t] / norm;
                }
            }
            theta.copy_from_slice(&acc);
            normalize(&mut theta);
        }
        theta
    }

    /// Arun's symmetric divergence between the normalized singular values of
    /// the topic-word matrix and the length-weighted topic mass, both sorted
    /// in decreasing order.
    pub fn arun_divergence(&self, doc_lengths: &[usize]) -> f64 {
        let v = self.vocabulary.len();
        let m = DMatrix::from_fn(self.k, v, |t, w| self.topic_word[t][w]);
        let mut cm1: Vec<f64> = m.singular_values().iter().copied().collect();
        let mut cm2 = vec![0.0; self.k];
        for (row, &len) in self.doc_topic.iter().zip(doc_lengths) {
            for t in 0..self.k {
                cm2[t] += len as f64 * row[t];
            }
        }
        for dist in [&mut cm1, &mut cm2] {
            dist.sort_by(|a, b| b.total_cmp(a));
            dist.iter_mut().for_each(|x| *x = x.max(1e-12));
            normalize(dist);
        }
        cm1.iter().zip(&cm2).map(|(&a, &b)| a * (a / b).ln() + b * (b / a).ln()).sum()
    }

    pub fn dominant_topic(row: &[f64]) -> usize {
        super::svm::argmax(row).unwrap_or(0)
    }
}

/// Result of topic-count selection: the chosen model and the divergence of
/// every candidate.
#[derive(Debug, Clone)]
pub struct Selection {
    pub model: TopicModel,
    pub divergences: Vec<(usize, f64)>,
}

/// Fits a model for `config.k`, or for every candidate K and keeps the one
/// with the smallest divergence (the smaller K on ties). Candidates are
/// fitted concurrently and each uses the seed `seed + K`.
pub fn fit_topics(docs: &[Vec<usize>], vocabulary: &BTreeMap<String, usize>, config: &TopicConfig, seed: u64, exec: Execution) -> Result<Selection, TopicError> {
    let lengths: Vec<usize> = docs.iter().map(Vec::len).collect();
    if let Some(k) = config.k {
        let model = fit(docs, vocabulary, k, config, seed.wrapping_add(k as u64))?;
        let d = model.arun_divergence(&lengths);
        return Ok(Selection { model, divergences: vec![(k, d)] });
    }
    let (lo, hi) = config.candidates;
    let ks: Vec<usize> = (lo..=hi).collect();
    let fitted = par::map(exec, &ks, |&k| fit(docs, vocabulary, k, config, seed.wrapping_add(k as u64)));
    let mut best: Option<(f64, TopicModel)> = None;
    let mut divergences = Vec::new();
    for (k, m) in ks.iter().zip(fitted) {
        let model = match m {
            Ok(m) => m,
            Err(TopicError::Degenerate { .. }) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        let d = model.arun_divergence(&lengths);
        divergences.push((*k, d));
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, model));
        }
    }
    let (_, model) = best.expect("at least one candidate fitted");
    Ok(Selection { model, divergences })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TopicConfig {
        TopicConfig { burn_in: 50, samples: 10, ..Default::default() }
    }

    fn vocab(n: usize) -> BTreeMap<String, usize> {
        (0..n).map(|i| (format!("w{i:03}"), i)).collect()
    }

    #[test]
    fn single_document_rows_normalized() {
        let m = fit(&[vec![0, 1, 2, 1]], &vocab(3), 2, &small_config(), 7).unwrap();
        assert!((m.doc_topic[0].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for row in &m.topic_word {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_tokens_is_degenerate() {
        assert_eq!(fit(&[vec![0, 0]], &vocab(1), 2, &small_config(), 1).unwrap_err(), TopicError::Degenerate { distinct: 1, k: 2 });
    }

    #[test]
    fn same_seed_same_model() {
        let docs = vec![vec![0, 1, 2], vec![3, 4, 3], vec![0, 2, 2]];
        let a = fit(&docs, &vocab(5), 2, &small_config(), 3).unwrap();
        let b = fit(&docs, &vocab(5), 2, &small_config(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_document_infers_uniform() {
        let m = fit(&[vec![0, 1], vec![2, 3]], &vocab(4), 2, &small_config(), 5).unwrap();
        assert_eq!(m.infer(&[], 10), vec![0.5, 0.5]);
        assert!((m.infer(&["w000".into()], 10).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

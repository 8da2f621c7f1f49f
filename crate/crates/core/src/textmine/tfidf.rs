use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sparse vector as `(feature, value)` pairs sorted by feature.
pub type SparseVec = Vec<(usize, f64)>;

/// Term-frequency times smoothed inverse document frequency,
/// `idf = ln((1 + n) / (1 + df)) + 1`, with rows scaled to unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
}

impl TfIdf {
    pub fn fit(vocabulary: &BTreeMap<String, usize>, documents: &[Vec<String>]) -> Self {
        let mut df = vec![0usize; vocabulary.len()];
        for doc in documents {
            let mut seen: Vec<usize> = doc.iter().filter_map(|t| vocabulary.get(t).copied()).collect();
            seen.sort_unstable();
            seen.dedup();
            for i in seen {
                df[i] += 1;
            }
        }
        let n = documents.len() as f64;
        let idf = df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
        TfIdf { vocabulary: vocabulary.clone(), idf }
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Out-of-vocabulary tokens are ignored; a document with no known token
    /// maps to the empty vector.
    pub fn transform(&self, tokens: &[String]) -> SparseVec {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&i) = self.vocabulary.get(t) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let mut v: SparseVec = counts.into_iter().map(|(i, tf)| (i, tf * self.idf[i])).collect();
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, x) in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> BTreeMap<String, usize> {
        words.iter().enumerate().map(|(i, w)| (w.to_string(), i)).collect()
    }

    #[test]
    fn rare_terms_weigh_more() {
        let docs = vec![vec!["a".to_string(), "b".to_string()], vec!["a".to_string()]];
        let t = TfIdf::fit(&vocab(&["a", "b"]), &docs);
        assert!((t.idf[0] - 1.0).abs() < 1e-12);
        assert!((t.idf[1] - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
        let v = t.transform(&docs[0]);
        assert!(v[1].1 > v[0].1);
        assert!((v.iter().map(|x| x.1 * x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_tokens_vanish() {
        let t = TfIdf::fit(&vocab(&["a"]), &[vec!["a".to_string()]]);
        assert_eq!(t.transform(&["a".to_string(), "zz".to_string()]), t.transform(&["a".to_string()]));
        assert!(t.transform(&["zz".to_string()]).is_empty());
    }
}

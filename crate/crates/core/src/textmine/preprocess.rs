use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::BugId;

pub const MAX_TOKEN_LEN: usize = 20;

const STOPWORDS: &str = include_str!("resources/stopwords.txt");
const LEMMAS: &str = include_str!("resources/lemmas.txt");

/// Tokenizer with a stop-word list and a lemma table, both given as plain
/// text with one entry per line (`inflected lemma` for the table).
#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Preprocessor {
    pub fn from_resources(stopwords: &str, lemmas: &str) -> Self {
        let stopwords = stopwords.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect();
        let lemmas = lemmas
            .lines()
            .filter_map(|l| {
                let mut parts = l.split_whitespace();
                Some((parts.next()?.to_lowercase(), parts.next()?.to_lowercase()))
            })
            .collect();
        Preprocessor { stopwords, lemmas }
    }

    pub fn bundled() -> &'static Preprocessor {
        static BUNDLED: OnceLock<Preprocessor> = OnceLock::new();
        BUNDLED.get_or_init(|| Preprocessor::from_resources(STOPWORDS, LEMMAS))
    }

    /// Merges summary and description and returns the cleaned tokens.
    pub fn tokens(&self, summary: &str, description: &str) -> Vec<String> {
        let mut out = Vec::new();
        for text in [summary, description] {
            for raw in text.split(|c: char| !c.is_alphanumeric()) {
                if raw.is_empty() || raw.chars().any(|c| c.is_numeric()) {
                    continue;
                }
                let word = raw.to_lowercase();
                if self.stopwords.contains(&word) {
                    continue;
                }
                let lemma = self.lemmas.get(&word).cloned().unwrap_or(word);
                if lemma.chars().count() > MAX_TOKEN_LEN || self.stopwords.contains(&lemma) {
                    continue;
                }
                out.push(lemma);
            }
        }
        out
    }
}

/// Tokens of a bug's summary and description using the bundled resources.
pub fn preprocess(summary: &str, description: &str) -> Vec<String> {
    Preprocessor::bundled().tokens(summary, description)
}

/// Tokenized documents with a vocabulary in sorted token order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<(BugId, Vec<String>)>,
    pub vocabulary: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn new(documents: Vec<(BugId, Vec<String>)>) -> Self {
        let mut vocabulary: BTreeMap<String, usize> = documents.iter().flat_map(|(_, t)| t.iter().cloned()).map(|t| (t, 0)).collect();
        for (i, v) in vocabulary.values_mut().enumerate() {
            *v = i;
        }
        Corpus { documents, vocabulary }
    }

    /// Documents as vocabulary indices.
    pub fn encoded(&self) -> Vec<Vec<usize>> {
        self.documents.iter().map(|(_, t)| t.iter().map(|w| self.vocabulary[w]).collect()).collect()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_rules_applied() {
        assert_eq!(preprocess("Crash on save", "The editor crashes at 3pm!!"), vec!["crash", "save", "editor", "crash"]);
    }

    #[test]
    fn empty_text_gives_no_tokens() {
        assert!(preprocess("", "").is_empty());
    }

    #[test]
    fn long_words_are_dropped() {
        let twenty = "a".repeat(20);
        let twenty_one = "b".repeat(21);
        assert_eq!(preprocess(&format!("{twenty} {twenty_one}"), ""), vec![twenty]);
    }

    #[test]
    fn corpus_vocabulary_is_sorted() {
        let c = Corpus::new(vec![(BugId(1), vec!["zeta".into(), "alpha".into()]), (BugId(2), vec!["alpha".into()])]);
        assert_eq!(c.vocabulary["alpha"], 0);
        assert_eq!(c.encoded(), vec![vec![1, 0], vec![0]]);
    }
}

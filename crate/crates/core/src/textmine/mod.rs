//! Text mining: bug text to suitability scores and fixing costs.

pub mod cost;
pub mod lda;
pub mod preprocess;
pub mod svm;
pub mod tfidf;

pub use cost::{CostError, CostMatrix, FixObservation};
pub use lda::{fit_topics, Selection, TopicError, TopicModel};
pub use preprocess::{preprocess, Corpus, Preprocessor};
pub use svm::{argmax, LinearSvm, SuitabilityModel, SvmError, SCORE_EPSILON};
pub use tfidf::{SparseVec, TfIdf};

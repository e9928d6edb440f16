//! Comparison feature extractors that feed the same linear probe: TF-IDF
//! over raw text and the stored last-token hidden state.

mod hidden;
mod texts;
mod tfidf;

pub use hidden::{hidden_state_features, hidden_state_rows};
pub use texts::TextSidecar;
pub use tfidf::{fit_tfidf, tokenize, transform_tfidf, TextCorpus, TfidfVocabulary};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use super::TextSidecar;
use crate::classifier::Split;
use crate::error::{Error, Result};
use crate::pooling::{MatrixMeta, PooledMatrix, PooledVector, Rows};

/// Texts with parallel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TextCorpus {
    pub example_ids: Vec<u64>,
    pub texts: Vec<String>,
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
}

impl TextCorpus {
    /// Corpus with ids `0..n`.
    pub fn new(texts: Vec<String>, labels: Vec<usize>, label_names: Vec<String>) -> Result<Self> {
        if texts.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!("{} texts but {} labels", texts.len(), labels.len())));
        }
        Ok(TextCorpus { example_ids: (0..texts.len() as u64).collect(), texts, labels, label_names })
    }

    /// Looks up the text of every record in `split` in its sidecar.
    pub fn from_split(split: Split<'_>) -> Result<Self> {
        let sidecar: &TextSidecar = split
            .texts
            .ok_or_else(|| Error::Config("tfidf strategy requires a text sidecar (--texts)".into()))?;
        let mut corpus = TextCorpus {
            example_ids: Vec::with_capacity(split.len()),
            texts: Vec::with_capacity(split.len()),
            labels: Vec::with_capacity(split.len()),
            label_names: split.dataset.manifest.label_names.clone(),
        };
        for &p in split.positions {
            let r = &split.dataset.records[p];
            let text = sidecar
                .get(r.example_id)
                .ok_or_else(|| Error::Config(format!("text sidecar has no entry for example {}", r.example_id)))?;
            corpus.example_ids.push(r.example_id);
            corpus.texts.push(text.to_string());
            corpus.labels.push(r.label());
        }
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

fn is_separator(c: char) -> bool {
    c.is_whitespace()
        || matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        )
}

/// Lowercases, then splits on Unicode whitespace and punctuation.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase().split(is_separator).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// Fitted vocabulary. Column `i` is `terms[i]`; terms are in lexicographic
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVocabulary {
    pub terms: Vec<String>,
    pub document_frequency: Vec<usize>,
    pub document_count: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfVocabulary {
    fn build(terms: Vec<(String, usize)>, document_count: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
        let (terms, document_frequency) = terms.into_iter().unzip();
        TfidfVocabulary { terms, document_frequency, document_count, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        if self.index.is_empty() && !self.terms.is_empty() {
            return self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok();
        }
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.column(term).map(|c| self.document_frequency[c])
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, column: usize) -> f64 {
        let n = self.document_count as f64;
        ((1.0 + n) / (1.0 + self.document_frequency[column] as f64)).ln() + 1.0
    }
}

pub fn fit_tfidf(corpus: &TextCorpus, min_df: usize, max_features: Option<usize>) -> Result<TfidfVocabulary> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("cannot fit TF-IDF on an empty corpus".into()));
    }
    if min_df == 0 || max_features == Some(0) {
        return Err(Error::InvalidArgument("min_df and max_features must be positive".into()));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in &corpus.texts {
        let mut terms = tokenize(text);
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|&(_, d)| d >= min_df).collect();
    if let Some(max) = max_features {
        if kept.len() > max {
            kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            kept.truncate(max);
            kept.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }
    Ok(TfidfVocabulary::build(kept, corpus.len()))
}

/// Raw term counts times idf, L2-normalized per row. Out-of-vocabulary
/// terms are ignored; a document with none left is a zero row.
pub fn transform_tfidf(corpus: &TextCorpus, vocab: &TfidfVocabulary) -> PooledMatrix {
    let width = vocab.len();
    let rows = corpus
        .texts
        .iter()
        .map(|text| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for t in tokenize(text) {
                if let Some(c) = vocab.column(&t) {
                    *counts.entry(c).or_default() += 1;
                }
            }
            let mut entries: Vec<(u32, f64)> =
                counts.into_iter().map(|(c, n)| (c as u32, n as f64 * vocab.idf(c))).collect();
            let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            if norm > 0.0 {
                for e in &mut entries {
                    e.1 /= norm;
                }
            }
            PooledVector { width, entries }
        })
        .collect();
    let meta = MatrixMeta { label_names: corpus.label_names.clone(), task: String::new(), language: None };
    let mut m = PooledMatrix::new(Rows::Sparse(rows), corpus.labels.clone(), width, meta);
    m.example_ids = corpus.example_ids.clone();
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> TextCorpus {
        let n = texts.len();
        TextCorpus::new(texts.iter().map(|s| s.to_string()).collect(), (0..n).map(|i| i % 2).collect(), vec!["a".into(), "b".into()])
            .unwrap()
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("Hello, World! it's  fine\tOK"), vec!["hello", "world", "it", "s", "fine", "ok"]);
        assert_eq!(tokenize("Straße「東京」\u{2014}ÉTÉ"), vec!["straße", "東京", "été"]);
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn fit_counts() {
        let v = fit_tfidf(&corpus(&["a b", "b c"]), 1, None).unwrap();
        assert_eq!(v.terms, vec!["a", "b", "c"]);
        assert_eq!((v.df("a"), v.df("b"), v.df("c")), (Some(1), Some(2), Some(1)));
        assert_eq!(v.idf(v.column("b").unwrap()), 1.0);
        let only_b = fit_tfidf(&corpus(&["a b", "b c"]), 2, None).unwrap();
        assert_eq!(only_b.terms, vec!["b"]);
    }

    #[test]
    fn max_features_prefers_df_then_lexicographic() {
        let v = fit_tfidf(&corpus(&["x y z", "y z", "z w"]), 1, Some(2)).unwrap();
        assert_eq!(v.terms, vec!["y", "z"]);
        let tie = fit_tfidf(&corpus(&["q p", "r"]), 1, Some(2)).unwrap();
        assert_eq!(tie.terms, vec!["p", "q"]);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(fit_tfidf(&corpus(&[]), 1, None).is_err());
    }

    #[test]
    fn single_term_row_and_empty_row() {
        let v = fit_tfidf(&corpus(&["a b", "b c"]), 1, None).unwrap();
        let m = transform_tfidf(&corpus(&["b b", "", "zzz"]), &v);
        assert_eq!(m.row(0).collect::<Vec<_>>(), vec![(1, 1.0)]);
        assert_eq!(m.row(1).count(), 0);
        assert_eq!(m.row(2).count(), 0);
    }

    #[test]
    fn matches_brute_force() {
        let docs = ["the cat sat", "the dog sat down", "a cat and a dog", "down down down"];
        let c = corpus(&docs);
        let v = fit_tfidf(&c, 1, None).unwrap();
        let m = transform_tfidf(&c, &v);
        // Independent recomputation from whitespace-split documents.
        let split: Vec<Vec<&str>> = docs.iter().map(|d| d.split(' ').collect()).collect();
        let mut vocab: Vec<&str> = split.iter().flatten().copied().collect();
        vocab.sort();
        vocab.dedup();
        assert_eq!(v.terms, vocab);
        for (i, doc) in split.iter().enumerate() {
            let raw: Vec<f64> = vocab
                .iter()
                .map(|t| {
                    let tf = doc.iter().filter(|w| *w == t).count() as f64;
                    let df = split.iter().filter(|d| d.contains(t)).count() as f64;
                    tf * ((1.0 + 4.0) / (1.0 + df)).ln() + tf * 1.0
                })
                .collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let got = m.dense_row(i);
            for (a, b) in got.iter().zip(&raw) {
                assert!((a - b / norm).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn rows_have_unit_norm(words in prop::collection::vec(prop::collection::vec("[a-e]{1,3}", 1..6), 1..8)) {
            let texts: Vec<String> = words.iter().map(|w| w.join(" ")).collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let c = corpus(&refs);
            let v = fit_tfidf(&c, 1, None).unwrap();
            let m = transform_tfidf(&c, &v);
            for i in 0..m.len() {
                let n: f64 = m.row(i).map(|(_, x)| x * x).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}

//! Tokenization, vocabulary pruning and bag-of-words conversion.
//!
//! Vocabulary pruning applies two per-term predicates over corpus statistics:
//! a document-frequency ceiling and a tf-idf floor, where a term's tf-idf score is
//!
//! ```text
//! score(t) = mean over documents d containing t of  (count(t, d) / |d|) * ln(n_docs / df(t))
//! ```
//!
//! Both filters are applied after stopword removal. Retained terms are indexed in
//! lexicographic order so that ids are stable across runs and platforms.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

pub const VOCABULARY_FORMAT: &str = "topic-resonance/vocabulary";
pub const VOCABULARY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("every term was pruned (df_max = {df_max}, tfidf_min = {tfidf_min})")]
    EmptyVocabulary { df_max: f64, tfidf_min: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("vocabulary file: {0}")]
    Format(String),
}

/// Lowercasing alphabetic tokenizer with a stopword list and a minimum token length.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
    min_len: usize,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer { stopwords: parse_stopwords(DEFAULT_STOPWORDS), min_len: 2 }
    }
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_lowercase).collect()
}

impl Tokenizer {
    pub fn new<I, S>(stopwords: I, min_len: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Tokenizer { stopwords: stopwords.into_iter().map(|s| s.as_ref().to_lowercase()).collect(), min_len }
    }

    pub fn from_stopword_file(path: &Path, min_len: usize) -> io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Tokenizer { stopwords: parse_stopwords(&text), min_len })
    }

    pub fn with_min_len(mut self, min_len: usize) -> Self {
        self.min_len = min_len;
        self
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphabetic())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| t.chars().count() >= self.min_len && !self.stopwords.contains(t))
            .collect()
    }
}

/// Identifies the vocabulary a model or corpus was built against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabSignature {
    pub n_terms: usize,
    pub fingerprint: String,
}

impl VocabSignature {
    /// Signature for corpora with no backing term list, such as sampler output.
    pub fn synthetic(n_terms: usize) -> Self {
        VocabSignature { n_terms, fingerprint: format!("synthetic-{n_terms}") }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    tfidf_score: Vec<f64>,
    n_docs: usize,
    index: HashMap<String, u32>,
}

/// Per-term corpus statistics before any pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStats {
    pub doc_freq: u32,
    pub tfidf_score: f64,
}

/// Document frequency and tf-idf score of every term in `docs`.
pub fn term_stats<D: AsRef<[String]>>(docs: &[D]) -> BTreeMap<String, TermStats> {
    let n_docs = docs.len() as f64;
    let mut tfs: HashMap<&str, Vec<f64>> = HashMap::new();
    for doc in docs {
        let doc = doc.as_ref();
        if doc.is_empty() {
            continue;
        }
        let mut counts: HashMap<&str, u32> = HashMap::new();
        for t in doc {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        let len = doc.len() as f64;
        for (t, c) in counts {
            tfs.entry(t).or_default().push(c as f64 / len);
        }
    }
    tfs.into_iter()
        .map(|(t, mut tf)| {
            // summed in sorted order so the score does not depend on document order
            tf.sort_by(f64::total_cmp);
            let df = tf.len();
            let idf = (n_docs / df as f64).ln();
            let mean_tf = tf.iter().sum::<f64>() / df as f64;
            (t.to_string(), TermStats { doc_freq: df as u32, tfidf_score: mean_tf * idf })
        })
        .collect()
}

impl Vocabulary {
    /// Build the pruned vocabulary. A term is kept iff `df / n_docs <= df_max` and
    /// `score >= tfidf_min`.
    pub fn build<D: AsRef<[String]>>(docs: &[D], df_max: f64, tfidf_min: f64) -> Result<Self, TextprepError> {
        if !(df_max > 0.0 && df_max <= 1.0) {
            return Err(TextprepError::InvalidParameter(format!("df_max must lie in (0, 1], got {df_max}")));
        }
        if !(tfidf_min >= 0.0) {
            return Err(TextprepError::InvalidParameter(format!("tfidf_min must be >= 0, got {tfidf_min}")));
        }
        let n_docs = docs.len();
        let stats = term_stats(docs);
        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        let mut tfidf_score = Vec::new();
        for (term, st) in stats {
            if st.doc_freq as f64 / n_docs as f64 <= df_max && st.tfidf_score >= tfidf_min {
                terms.push(term);
                doc_freq.push(st.doc_freq);
                tfidf_score.push(st.tfidf_score);
            }
        }
        if terms.is_empty() {
            return Err(TextprepError::EmptyVocabulary { df_max, tfidf_min });
        }
        Ok(Self::from_parts(terms, doc_freq, tfidf_score, n_docs))
    }

    fn from_parts(terms: Vec<String>, doc_freq: Vec<u32>, tfidf_score: Vec<f64>, n_docs: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { terms, doc_freq, tfidf_score, n_docs, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }

    pub fn tfidf_score(&self, id: u32) -> f64 {
        self.tfidf_score[id as usize]
    }

    /// SHA-256 over the ordered term list.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.terms {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn signature(&self) -> VocabSignature {
        VocabSignature { n_terms: self.len(), fingerprint: self.fingerprint() }
    }

    /// Term ids of the in-vocabulary tokens, in order.
    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t)).collect()
    }

    pub fn to_bow(&self, tokens: &[String]) -> BagOfWords {
        BagOfWords::from_ids(self.encode(tokens))
    }

    /// One term per line in index order.
    pub fn write_terms<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.terms {
            writeln!(w, "{t}")?;
        }
        w.flush()
    }

    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<(), TextprepError> {
        let file = VocabularyFile {
            format: VOCABULARY_FORMAT.into(),
            version: VOCABULARY_VERSION,
            n_docs: self.n_docs,
            fingerprint: self.fingerprint(),
            terms: self
                .terms
                .iter()
                .zip(&self.doc_freq)
                .zip(&self.tfidf_score)
                .map(|((term, &doc_freq), &tfidf_score)| TermEntry { term: term.clone(), doc_freq, tfidf_score })
                .collect(),
        };
        serde_json::to_writer_pretty(w, &file)?;
        Ok(())
    }

    pub fn read_sidecar<R: io::Read>(r: R) -> Result<Self, TextprepError> {
        let file: VocabularyFile = serde_json::from_reader(r)?;
        if file.format != VOCABULARY_FORMAT || file.version != VOCABULARY_VERSION {
            return Err(TextprepError::Format(format!("unsupported format {} v{}", file.format, file.version)));
        }
        let mut terms = Vec::with_capacity(file.terms.len());
        let mut df = Vec::with_capacity(file.terms.len());
        let mut sc = Vec::with_capacity(file.terms.len());
        for e in file.terms {
            terms.push(e.term);
            df.push(e.doc_freq);
            sc.push(e.tfidf_score);
        }
        let vocab = Self::from_parts(terms, df, sc, file.n_docs);
        if vocab.fingerprint() != file.fingerprint {
            return Err(TextprepError::Format("fingerprint does not match term list".into()));
        }
        Ok(vocab)
    }
}

#[derive(Serialize, Deserialize)]
struct TermEntry {
    term: String,
    doc_freq: u32,
    tfidf_score: f64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    format: String,
    version: u32,
    n_docs: usize,
    fingerprint: String,
    terms: Vec<TermEntry>,
}

/// Sparse term counts of one document, sorted by term id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BagOfWords {
    pub pairs: Vec<(u32, u32)>,
}

impl BagOfWords {
    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for id in ids {
            *counts.entry(id).or_default() += 1;
        }
        BagOfWords { pairs: counts.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of distinct terms.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Total token count.
    pub fn total(&self) -> u64 {
        self.pairs.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn max_term(&self) -> Option<u32> {
        self.pairs.last().map(|&(t, _)| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tokenize_rules() {
        let tok = Tokenizer::default();
        assert_eq!(tok.tokenize("Deep Learning, 2023!"), vec!["deep", "learning"]);
        assert!(tok.tokenize("").is_empty());
        assert_eq!(tok.tokenize("The x-ray of a GAN"), vec!["ray", "gan"]);
        let short = Tokenizer::new(["the"], 1);
        assert_eq!(short.tokenize("the x-ray"), vec!["x", "ray"]);
        assert_eq!(Tokenizer::default().tokenize("Über naïve café"), vec!["über", "naïve", "café"]);
    }

    #[test]
    fn shipped_stopword_list_loads() {
        let tok = Tokenizer::default();
        assert!(tok.is_stopword("the"));
        assert!(tok.is_stopword("and"));
        assert!(!tok.is_stopword("network"));
    }

    #[test]
    fn df_ceiling_removes_ubiquitous_terms() {
        let docs = vec![toks("net alpha"), toks("net beta"), toks("net gamma"), toks("net delta")];
        let v = Vocabulary::build(&docs, 0.5, 0.0).unwrap();
        assert_eq!(v.id("net"), None);
        assert_eq!(v.terms(), &["alpha", "beta", "delta", "gamma"]);
        assert!(Vocabulary::build(&docs, 1.0, 0.0).unwrap().id("net").is_some());
    }

    #[test]
    fn zero_threshold_equals_df_filter() {
        let docs = vec![toks("a b c"), toks("a b"), toks("a d d")];
        let v = Vocabulary::build(&docs, 0.7, 0.0).unwrap();
        let expected: Vec<&str> = ["b", "c", "d"]
            .into_iter()
            .filter(|t| docs.iter().filter(|d| d.iter().any(|x| x == t)).count() as f64 / 3.0 <= 0.7)
            .collect();
        assert_eq!(v.terms(), expected.as_slice());
    }

    #[test]
    fn tfidf_brute_force() {
        let docs = vec![
            toks("topic model topic inference"),
            toks("neural network training"),
            toks("topic coherence neural"),
            toks("graph network graph graph"),
            toks("inference model"),
        ];
        let n = docs.len() as f64;
        // independent recomputation straight from the definition
        let mut all: Vec<String> = docs.iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        let score = |t: &str| {
            let containing: Vec<&Vec<String>> = docs.iter().filter(|d| d.iter().any(|x| x == t)).collect();
            let df = containing.len() as f64;
            containing
                .iter()
                .map(|d| d.iter().filter(|x| *x == t).count() as f64 / d.len() as f64 * (n / df).ln())
                .sum::<f64>()
                / df
        };
        for thr in [0.0, 0.1, 0.2, 0.3, 0.45] {
            let expected: Vec<String> = all.iter().filter(|t| score(t) >= thr).cloned().collect();
            match Vocabulary::build(&docs, 1.0, thr) {
                Ok(v) => {
                    assert_eq!(v.terms(), expected.as_slice(), "threshold {thr}");
                    for (i, t) in v.terms().iter().enumerate() {
                        assert!((v.tfidf_score(i as u32) - score(t)).abs() < 1e-12);
                    }
                }
                Err(TextprepError::EmptyVocabulary { .. }) => assert!(expected.is_empty()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn empty_vocabulary_error() {
        let docs = vec![toks("same"), toks("same")];
        assert!(matches!(Vocabulary::build(&docs, 0.5, 0.0), Err(TextprepError::EmptyVocabulary { .. })));
        assert!(matches!(Vocabulary::build(&docs, 0.0, 0.0), Err(TextprepError::InvalidParameter(_))));
        assert!(matches!(Vocabulary::build(&docs, 1.0, -1.0), Err(TextprepError::InvalidParameter(_))));
    }

    #[test]
    fn bow_counts() {
        let docs = vec![toks("a b"), toks("c")];
        let v = Vocabulary::build(&docs, 1.0, 0.0).unwrap();
        assert_eq!(v.to_bow(&toks("a b a")).pairs, vec![(0, 2), (1, 1)]);
        assert!(v.to_bow(&toks("zzz yyy")).is_empty());
    }

    #[test]
    fn sidecar_roundtrip() {
        let docs = vec![toks("a b c"), toks("b c d"), toks("e")];
        let v = Vocabulary::build(&docs, 1.0, 0.0).unwrap();
        let mut buf = Vec::new();
        v.write_sidecar(&mut buf).unwrap();
        let back = Vocabulary::read_sidecar(buf.as_slice()).unwrap();
        assert_eq!(back, v);
        let mut lines = Vec::new();
        v.write_terms(&mut lines).unwrap();
        assert_eq!(String::from_utf8(lines).unwrap(), "a\nb\nc\nd\ne\n");
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        let word = prop::sample::select(vec!["aa", "bb", "cc", "dd", "ee", "ff", "gg", "hh"]);
        prop::collection::vec(prop::collection::vec(word.prop_map(String::from), 1..12), 2..15)
    }

    proptest! {
        #[test]
        fn build_is_order_independent(docs in corpus_strategy(), df in 0.3f64..1.0, thr in 0.0f64..0.3) {
            let mut rev = docs.clone();
            rev.reverse();
            let a = Vocabulary::build(&docs, df, thr).ok().map(|v| v.terms().to_vec());
            let b = Vocabulary::build(&rev, df, thr).ok().map(|v| v.terms().to_vec());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn raising_threshold_never_adds_terms(docs in corpus_strategy(), lo in 0.0f64..0.2, step in 0.0f64..0.2) {
            let low: HashSet<String> = Vocabulary::build(&docs, 1.0, lo).map(|v| v.terms().to_vec()).unwrap_or_default().into_iter().collect();
            let high: HashSet<String> = Vocabulary::build(&docs, 1.0, lo + step).map(|v| v.terms().to_vec()).unwrap_or_default().into_iter().collect();
            prop_assert!(high.is_subset(&low));
        }

        #[test]
        fn bow_total_matches_in_vocab_count(docs in corpus_strategy(), probe in prop::collection::vec("[a-h]{2}", 0..50)) {
            let v = Vocabulary::build(&docs, 1.0, 0.0).unwrap();
            let bow = v.to_bow(&probe);
            let in_vocab = probe.iter().filter(|t| v.id(t).is_some()).count() as u64;
            prop_assert_eq!(bow.total(), in_vocab);
            prop_assert!(bow.total() <= probe.len() as u64);
            prop_assert!(bow.pairs.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(bow.pairs.iter().all(|&(_, c)| c > 0));
        }
    }
}

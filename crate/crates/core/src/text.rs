//! Tokenization, vocabulary and TF-IDF document vectors.
//!
//! Weights use log-scaled term frequency `1 + ln(count)` and smoothed inverse
//! document frequency `ln(n_docs / df) + 1`; every non-empty vector is L2
//! normalized.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

pub const DEFAULT_MAX_VOCAB: usize = 5000;
const MIN_TOKEN_CHARS: usize = 2;
const MAX_TOKEN_CHARS: usize = 40;

static STOPWORDS: &str = include_str!("stopwords.txt");

/// Token with its half-open character span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub term: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercasing, stopword-filtering tokenizer.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: BTreeSet<&'static str>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            stopwords: STOPWORDS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect(),
        }
    }
}

impl Tokenizer {
    pub fn is_stopword(&self, term: &str) -> bool {
        self.stopwords.contains(term)
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.spans(text).into_iter().map(|t| t.term).collect()
    }

    /// Tokens with character offsets into `text`.
    pub fn spans(&self, text: &str) -> Vec<TokenSpan> {
        let mut out = Vec::new();
        let mut run = String::new();
        let mut run_start = 0;
        let mut pos = 0;
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if run.is_empty() {
                    run_start = pos;
                }
                run.push(ch);
            } else if !run.is_empty() {
                self.emit(&mut out, &run, run_start, pos);
                run.clear();
            }
            pos += 1;
        }
        if !run.is_empty() {
            self.emit(&mut out, &run, run_start, pos);
        }
        out
    }

    fn emit(&self, out: &mut Vec<TokenSpan>, raw: &str, start: usize, end: usize) {
        let term = raw.to_lowercase();
        let n = term.chars().count();
        if !(MIN_TOKEN_CHARS..=MAX_TOKEN_CHARS).contains(&n) {
            return;
        }
        if term.chars().all(char::is_numeric) || self.is_stopword(&term) {
            return;
        }
        out.push(TokenSpan { term, start, end });
    }
}

/// Tokenizes with the bundled stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Fingerprint of a vocabulary's term list; vectors carry it so mixing
/// vectors from different indexes is detectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VocabId(pub u64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id: VocabId,
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    fn new(terms: Vec<String>, df: Vec<u32>, n_docs: usize) -> Self {
        // FNV-1a over the terms, NUL separated
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in &terms {
            for b in t.bytes().chain(core::iter::once(0)) {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        Vocabulary {
            id: VocabId(h),
            terms,
            df,
            n_docs,
        }
    }

    pub fn id(&self) -> VocabId {
        self.id
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
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

    pub fn df(&self, index: usize) -> u32 {
        self.df[index]
    }

    pub fn idf(&self, index: usize) -> f64 {
        libm::log(self.n_docs as f64 / f64::from(self.df[index])) + 1.0
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }
}

/// Sparse TF-IDF vector, sorted by term index.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVector {
    pub doc_id: String,
    pub vocab: VocabId,
    pub weights: Vec<(u32, f64)>,
}

impl DocumentVector {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.weights.iter().map(|(_, w)| w * w).sum())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; dim];
        for &(i, w) in &self.weights {
            out[i as usize] = w;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("cannot index an empty document set")]
    NoDocuments,
    #[error("max_vocab must be positive")]
    ZeroVocabulary,
}

/// Result of [`build_index`]; `vectors[i]` belongs to the i-th input document.
#[derive(Debug, Clone)]
pub struct Index {
    pub vocabulary: Vocabulary,
    pub vectors: Vec<DocumentVector>,
    /// Documents left with no in-vocabulary term.
    pub empty_documents: Vec<String>,
}

impl Index {
    pub fn vector(&self, doc_id: &str) -> Option<&DocumentVector> {
        self.vectors.iter().find(|v| v.doc_id == doc_id)
    }
}

pub fn build_index(docs: &[&Document], max_vocab: usize) -> Result<Index, IndexError> {
    if docs.is_empty() {
        return Err(IndexError::NoDocuments);
    }
    if max_vocab == 0 {
        return Err(IndexError::ZeroVocabulary);
    }
    let tokenizer = Tokenizer::default();
    let counts: Vec<BTreeMap<String, u32>> = docs
        .iter()
        .map(|d| {
            let mut m = BTreeMap::new();
            for t in tokenizer.tokenize(&d.text()) {
                *m.entry(t).or_insert(0) += 1;
            }
            m
        })
        .collect();

    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for c in &counts {
        for t in c.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, u32)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_vocab);
    ranked.sort_by(|a, b| a.0.cmp(b.0));

    let terms: Vec<String> = ranked.iter().map(|(t, _)| String::from(*t)).collect();
    let dfs: Vec<u32> = ranked.iter().map(|(_, d)| *d).collect();
    let vocabulary = Vocabulary::new(terms, dfs, docs.len());

    let mut vectors = Vec::with_capacity(docs.len());
    let mut empty_documents = Vec::new();
    for (doc, c) in docs.iter().zip(&counts) {
        let mut weights: Vec<(u32, f64)> = c
            .iter()
            .filter_map(|(t, &n)| {
                let i = vocabulary.index_of(t)?;
                let tf = 1.0 + libm::log(f64::from(n));
                Some((i as u32, tf * vocabulary.idf(i)))
            })
            .collect();
        let norm = libm::sqrt(weights.iter().map(|(_, w)| w * w).sum());
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        } else {
            empty_documents.push(doc.id.clone());
        }
        vectors.push(DocumentVector {
            doc_id: doc.id.clone(),
            vocab: vocabulary.id(),
            weights,
        });
    }
    Ok(Index {
        vocabulary,
        vectors,
        empty_documents,
    })
}

/// Cosine similarity of two sparse vectors; 0 when either is empty.
pub fn cosine(a: &DocumentVector, b: &DocumentVector) -> f64 {
    debug_assert_eq!(a.vocab, b.vocab);
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    sparse_dot(&a.weights, &b.weights) / (na * nb)
}

pub(crate) fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Cosine between a dense query and a sparse document.
pub fn cosine_dense(query: &[f64], query_norm: f64, doc: &DocumentVector) -> f64 {
    let dn = doc.norm();
    if query_norm == 0.0 || dn == 0.0 {
        return 0.0;
    }
    let dot: f64 = doc
        .weights
        .iter()
        .map(|&(i, w)| query[i as usize] * w)
        .sum();
    dot / (query_norm * dn)
}

pub fn dense_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

//! Document collection and citation graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Publication type of a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    PrimaryStudy,
    SystematicReview,
    Overview,
    StructuredSummaryPs,
    StructuredSummarySr,
}

impl DocType {
    pub const ALL: [DocType; 5] = [
        DocType::PrimaryStudy,
        DocType::SystematicReview,
        DocType::Overview,
        DocType::StructuredSummaryPs,
        DocType::StructuredSummarySr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::PrimaryStudy => "primary_study",
            DocType::SystematicReview => "systematic_review",
            DocType::Overview => "overview",
            DocType::StructuredSummaryPs => "structured_summary_ps",
            DocType::StructuredSummarySr => "structured_summary_sr",
        }
    }

    pub fn parse(s: &str) -> Option<DocType> {
        DocType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One scientific article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(rename = "type")]
    pub doc_type: DocType,
    /// A missing or null title reads as empty and is rejected on ingest.
    #[serde(default, deserialize_with = "null_as_empty")]
    pub title: String,
    #[serde(rename = "abstract", default, deserialize_with = "null_as_empty")]
    pub abstract_text: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub authors: Vec<String>,
    /// Outgoing citations.
    #[serde(default)]
    pub references: Vec<String>,
}

fn null_as_empty<'de, D: serde::Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    Ok(Option::<String>::deserialize(d)?.unwrap_or_default())
}

impl Document {
    /// Title and abstract joined by a single space; the text every index and
    /// highlight offset is computed over.
    pub fn text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + 1 + self.abstract_text.len());
        s.push_str(&self.title);
        s.push(' ');
        s.push_str(&self.abstract_text);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Cites,
    CitedBy,
}

/// Forward and backward adjacency, each list sorted ascending by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    forward: BTreeMap<String, Vec<String>>,
    backward: BTreeMap<String, Vec<String>>,
}

impl CitationGraph {
    fn from_documents(docs: &BTreeMap<String, Document>) -> Self {
        let mut forward = BTreeMap::new();
        let mut backward: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, doc) in docs {
            let mut cited = doc.references.clone();
            cited.sort();
            for c in &cited {
                backward.entry(c.clone()).or_default().push(id.clone());
            }
            forward.insert(id.clone(), cited);
        }
        // documents are visited in id order, so every backward list is already sorted
        for id in docs.keys() {
            backward.entry(id.clone()).or_default();
        }
        CitationGraph { forward, backward }
    }

    pub fn forward(&self) -> &BTreeMap<String, Vec<String>> {
        &self.forward
    }

    pub fn backward(&self) -> &BTreeMap<String, Vec<String>> {
        &self.backward
    }

    /// Rebuilds the backward map from the forward map alone.
    pub fn transpose_of_forward(&self) -> BTreeMap<String, Vec<String>> {
        let mut out: BTreeMap<String, Vec<String>> =
            self.forward.keys().map(|k| (k.clone(), Vec::new())).collect();
        for (src, dsts) in &self.forward {
            for d in dsts {
                out.entry(d.clone()).or_default().push(src.clone());
            }
        }
        for v in out.values_mut() {
            v.sort();
        }
        out
    }
}

/// Per-load accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub type_counts: BTreeMap<DocType, usize>,
    pub dangling_references: usize,
    pub self_references: usize,
    pub duplicate_ids: usize,
    pub rejected_records: usize,
    /// 1-based line numbers of lines that failed to parse.
    pub malformed_lines: Vec<usize>,
}

impl Default for IngestReport {
    fn default() -> Self {
        IngestReport {
            accepted: 0,
            type_counts: DocType::ALL.into_iter().map(|t| (t, 0)).collect(),
            dangling_references: 0,
            self_references: 0,
            duplicate_ids: 0,
            rejected_records: 0,
            malformed_lines: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown document id `{0}`")]
    UnknownDocument(String),
}

/// Why a single record was not accepted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("document id is empty")]
    EmptyId,
    #[error("document `{0}` has no title")]
    MissingTitle(String),
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
}

/// Accumulates records, then resolves references into an immutable [`Corpus`].
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    docs: BTreeMap<String, Document>,
    report: IngestReport,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one record; the first record with a given id wins.
    pub fn push(&mut self, doc: Document) -> Result<(), RecordError> {
        if doc.id.trim().is_empty() {
            self.report.rejected_records += 1;
            return Err(RecordError::EmptyId);
        }
        if doc.title.trim().is_empty() {
            self.report.rejected_records += 1;
            return Err(RecordError::MissingTitle(doc.id));
        }
        if self.docs.contains_key(&doc.id) {
            self.report.duplicate_ids += 1;
            return Err(RecordError::DuplicateId(doc.id));
        }
        self.docs.insert(doc.id.clone(), doc);
        Ok(())
    }

    pub fn note_malformed(&mut self, line: usize) {
        self.report.malformed_lines.push(line);
    }

    pub fn finish(mut self) -> Corpus {
        let ids: BTreeSet<String> = self.docs.keys().cloned().collect();
        for doc in self.docs.values_mut() {
            let mut seen = BTreeSet::new();
            let mut kept = Vec::with_capacity(doc.references.len());
            for r in core::mem::take(&mut doc.references) {
                if r == doc.id {
                    self.report.self_references += 1;
                } else if !ids.contains(&r) {
                    self.report.dangling_references += 1;
                } else if seen.insert(r.clone()) {
                    kept.push(r);
                }
            }
            doc.references = kept;
            *self.report.type_counts.entry(doc.doc_type).or_default() += 1;
        }
        self.report.accepted = self.docs.len();
        let graph = CitationGraph::from_documents(&self.docs);
        Corpus {
            docs: self.docs,
            graph,
            report: self.report,
        }
    }
}

/// Immutable document collection with its citation graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: BTreeMap<String, Document>,
    graph: CitationGraph,
    report: IngestReport,
}

impl Corpus {
    pub fn from_documents<I: IntoIterator<Item = Document>>(docs: I) -> Corpus {
        let mut b = CorpusBuilder::new();
        for d in docs {
            let _ = b.push(d);
        }
        b.finish()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs.get(id)
    }

    pub fn document(&self, id: &str) -> Result<&Document, CorpusError> {
        self.docs
            .get(id)
            .ok_or_else(|| CorpusError::UnknownDocument(id.into()))
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Documents in ascending id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn graph(&self) -> &CitationGraph {
        &self.graph
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    /// Adjacent ids in ascending lexicographic order.
    pub fn neighbors(&self, id: &str, direction: Direction) -> Result<&[String], CorpusError> {
        let map = match direction {
            Direction::Cites => &self.graph.forward,
            Direction::CitedBy => &self.graph.backward,
        };
        map.get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| CorpusError::UnknownDocument(id.into()))
    }
}

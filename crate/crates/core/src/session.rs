//! Per-matrix curation session as a pure state machine over events.
//!
//! A session starts from a `create_matrix` event (seq 1) and every later
//! event must carry the next sequence number. Replaying the same events over
//! the same corpus always yields the same state, bit for bit.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Document};
use crate::matrix::{build_initial_matrix, EvidenceMatrix, Label, MatrixError};
use crate::relevance::{Prediction, RelevanceError, RelevanceModel, RocchioParams, Suggestions};
use crate::text::{build_index, DocumentVector, Index, IndexError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    /// RFC 3339 UTC instant supplied by the writer.
    pub timestamp: String,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventPayload {
    CreateMatrix {
        matrix_id: String,
        corpus_id: String,
        seed_id: String,
        max_vocab: usize,
        params: RocchioParams,
    },
    Classify {
        doc_id: String,
        label: Label,
    },
    Boost {
        term: String,
        delta_steps: i32,
    },
    SetParams {
        params: RocchioParams,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::CreateMatrix { .. } => "create_matrix",
            EventPayload::Classify { .. } => "classify",
            EventPayload::Boost { .. } => "boost",
            EventPayload::SetParams { .. } => "set_params",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("expected event seq {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("a session log must start with a create_matrix event")]
    MissingCreate,
    #[error("create_matrix may only appear as the first event")]
    DuplicateCreate,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("snapshot does not match this session: {0}")]
    SnapshotMismatch(&'static str),
}

/// Which documents a ranking covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Unknown,
    All,
}

/// Mutable part of a session, sufficient to restore it on top of the state
/// rebuilt from its create event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub last_seq: u64,
    pub labels: BTreeMap<String, Label>,
    pub model: RelevanceModel,
}

#[derive(Debug, Clone)]
pub struct SessionState {
    pub corpus_id: String,
    pub max_vocab: usize,
    pub matrix: EvidenceMatrix,
    pub index: Index,
    pub model: RelevanceModel,
    pub last_seq: u64,
    positions: BTreeMap<String, usize>,
}

impl SessionState {
    /// Builds M0, its index and the initial model from a seq-1 create event.
    pub fn create(corpus: &Corpus, event: &SessionEvent) -> Result<Self, SessionError> {
        let EventPayload::CreateMatrix { matrix_id, corpus_id, seed_id, max_vocab, params } = &event.payload else {
            return Err(SessionError::MissingCreate);
        };
        if event.seq != 1 {
            return Err(SessionError::SequenceGap { expected: 1, got: event.seq });
        }
        let matrix = build_initial_matrix(corpus, seed_id, matrix_id)?;
        let docs: Vec<&Document> = matrix
            .members()
            .map(|id| corpus.get(id).expect("matrix members come from the corpus"))
            .collect();
        let index = build_index(&docs, *max_vocab)?;
        let positions: BTreeMap<String, usize> = index
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (v.doc_id.clone(), i))
            .collect();
        let seed_vec = &index.vectors[positions[seed_id.as_str()]];
        let model = RelevanceModel::new(seed_vec, index.vocabulary.len(), *params)?;
        Ok(SessionState {
            corpus_id: corpus_id.clone(),
            max_vocab: *max_vocab,
            matrix,
            index,
            model,
            last_seq: 1,
            positions,
        })
    }

    pub fn replay(corpus: &Corpus, events: &[SessionEvent]) -> Result<Self, SessionError> {
        let (first, rest) = events.split_first().ok_or(SessionError::MissingCreate)?;
        let mut state = SessionState::create(corpus, first)?;
        for e in rest {
            state.apply(e)?;
        }
        Ok(state)
    }

    /// Rebuilds from the create event, then overlays a snapshot.
    pub fn restore(corpus: &Corpus, create: &SessionEvent, snapshot: SessionSnapshot) -> Result<Self, SessionError> {
        let mut state = SessionState::create(corpus, create)?;
        if snapshot.model.vocab() != state.model.vocab() {
            return Err(SessionError::SnapshotMismatch("vocabulary differs"));
        }
        if snapshot.labels.len() != state.matrix.labels.len()
            || snapshot.labels.keys().any(|k| !state.matrix.contains(k))
        {
            return Err(SessionError::SnapshotMismatch("label set differs"));
        }
        state.matrix.labels = snapshot.labels;
        state.model = snapshot.model;
        state.last_seq = snapshot.last_seq;
        Ok(state)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            last_seq: self.last_seq,
            labels: self.matrix.labels.clone(),
            model: self.model.clone(),
        }
    }

    /// Checks an event against the current state without applying it.
    pub fn validate(&self, event: &SessionEvent) -> Result<(), SessionError> {
        if event.seq != self.last_seq + 1 {
            return Err(SessionError::SequenceGap { expected: self.last_seq + 1, got: event.seq });
        }
        match &event.payload {
            EventPayload::CreateMatrix { .. } => Err(SessionError::DuplicateCreate),
            EventPayload::Classify { doc_id, .. } => {
                if self.matrix.contains(doc_id) {
                    Ok(())
                } else {
                    Err(MatrixError::NotInMatrix(doc_id.clone()).into())
                }
            }
            EventPayload::Boost { term, .. } => match self.index.vocabulary.index_of(term) {
                Some(_) => Ok(()),
                None => Err(RelevanceError::UnknownTerm(term.clone()).into()),
            },
            EventPayload::SetParams { params } => Ok(params.validate()?),
        }
    }

    /// Applies one event; on error the state is unchanged.
    pub fn apply(&mut self, event: &SessionEvent) -> Result<(), SessionError> {
        self.validate(event)?;
        match &event.payload {
            EventPayload::CreateMatrix { .. } => unreachable!("rejected by validate"),
            EventPayload::Classify { doc_id, label } => {
                self.matrix.set_label(doc_id, *label)?;
                let rel = self.vectors_with(Label::Relevant);
                let irr = self.vectors_with(Label::NonRelevant);
                let mut model = self.model.clone();
                model.update(&rel, &irr)?;
                self.model = model;
            }
            EventPayload::Boost { term, delta_steps } => {
                self.model.set_boost(&self.index.vocabulary, term, *delta_steps)?;
            }
            EventPayload::SetParams { params } => self.model.set_params(*params)?,
        }
        self.last_seq = event.seq;
        Ok(())
    }

    pub fn vector(&self, doc_id: &str) -> Option<&DocumentVector> {
        self.positions.get(doc_id).map(|&i| &self.index.vectors[i])
    }

    /// Vectors of documents carrying `label`, in matrix order.
    pub fn vectors_with(&self, label: Label) -> Vec<&DocumentVector> {
        self.matrix
            .ids_with_label(label)
            .map(|id| &self.index.vectors[self.positions[id.as_str()]])
            .collect()
    }

    pub fn all_vectors(&self) -> Vec<&DocumentVector> {
        self.index.vectors.iter().collect()
    }

    pub fn ranking(&self, scope: Scope) -> Vec<(String, f64)> {
        match scope {
            Scope::All => self.model.rank(&self.all_vectors()),
            Scope::Unknown => self.model.rank(&self.vectors_with(Label::Unknown)),
        }
    }

    pub fn suggestions(&self, k: usize) -> Suggestions {
        self.model.suggest(&self.vectors_with(Label::Unknown), k)
    }

    pub fn predict(&self, doc_id: &str) -> Option<Prediction> {
        self.vector(doc_id).map(|v| self.model.predict(v))
    }
}

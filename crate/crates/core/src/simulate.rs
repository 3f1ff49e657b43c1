//! Simulated curation with a perfectly accurate reviewer.
//!
//! Each round the reviewer confirms the `k` highest and `k` lowest ranked
//! unlabeled documents with their true labels, then the model is updated.
//! Recall is measured over the true-relevant documents of the initial matrix
//! other than the seed, against the fraction of those non-seed documents
//! reviewed so far.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::matrix::Label;
use crate::relevance::RocchioParams;
use crate::session::{EventPayload, SessionError, SessionEvent, SessionState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub rounds: usize,
    pub reviewed_count: usize,
    /// `(reviewed_fraction, recall)` after each round.
    pub recall_curve: Vec<(f64, f64)>,
    pub final_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("truth labels do not cover matrix document `{0}`")]
    MissingTruth(String),
    #[error("truth label for `{0}` must be relevant or non_relevant")]
    UndecidedTruth(String),
    #[error("k must be positive")]
    ZeroK,
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub k: usize,
    pub max_rounds: usize,
    pub params: RocchioParams,
    pub max_vocab: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            k: 10,
            max_rounds: 50,
            params: RocchioParams::default(),
            max_vocab: crate::text::DEFAULT_MAX_VOCAB,
        }
    }
}

/// Expected recall after reviewing `fraction` of the documents in uniformly
/// random order.
pub fn random_baseline_recall(fraction: f64) -> f64 {
    fraction.clamp(0.0, 1.0)
}

pub fn simulate_curation(
    corpus: &Corpus,
    seed_id: &str,
    truth: &BTreeMap<String, Label>,
    config: &SimulationConfig,
) -> Result<SimulationReport, SimulationError> {
    if config.k == 0 {
        return Err(SimulationError::ZeroK);
    }
    let create = SessionEvent {
        seq: 1,
        timestamp: String::new(),
        payload: EventPayload::CreateMatrix {
            matrix_id: "simulation".into(),
            corpus_id: String::new(),
            seed_id: seed_id.into(),
            max_vocab: config.max_vocab,
            params: config.params,
        },
    };
    let mut state = SessionState::create(corpus, &create)?;

    let mut targets = 0usize;
    let mut pool = 0usize;
    for id in state.matrix.members() {
        match truth.get(id) {
            None => return Err(SimulationError::MissingTruth(id.clone())),
            Some(Label::Unknown) => return Err(SimulationError::UndecidedTruth(id.clone())),
            Some(l) => {
                if id != seed_id {
                    pool += 1;
                    if *l == Label::Relevant {
                        targets += 1;
                    }
                }
            }
        }
    }

    let recall = |found: usize| if targets == 0 { 1.0 } else { found as f64 / targets as f64 };
    let mut found = 0;
    let mut reviewed = 0;
    let mut curve = Vec::new();
    while curve.len() < config.max_rounds {
        let s = state.suggestions(config.k);
        let batch: Vec<String> = s
            .predicted_relevant
            .into_iter()
            .chain(s.predicted_non_relevant)
            .map(|(id, _)| id)
            .collect();
        if batch.is_empty() {
            break;
        }
        // one update per round rather than per label, so the alpha term
        // does not compound within a batch
        for id in &batch {
            let label = truth[id];
            state.matrix.set_label(id, label).map_err(SessionError::from)?;
            reviewed += 1;
            if label == Label::Relevant {
                found += 1;
            }
        }
        let rel = state.vectors_with(Label::Relevant);
        let irr = state.vectors_with(Label::NonRelevant);
        let mut model = state.model.clone();
        model.update(&rel, &irr).map_err(SessionError::from)?;
        state.model = model;
        curve.push((reviewed as f64 / pool as f64, recall(found)));
    }
    Ok(SimulationReport {
        rounds: curve.len(),
        reviewed_count: reviewed,
        final_recall: curve.last().map_or(recall(found), |p| p.1),
        recall_curve: curve,
    })
}

//! Rocchio relevance model of an evidence matrix.
//!
//! The model keeps two queries over the matrix vocabulary: the relevant query
//! and its mirror for non-relevant documents. Each update is
//!
//! ```text
//! q_n = max(0, alpha*q_{n-1} + beta*q_0 + mean(R) ⊙ (gamma*b) - mean(I) ⊙ (delta*b))
//! ```
//!
//! where `b` is the per-term boost vector and `⊙` is the componentwise
//! product. The non-relevant query uses the same rule with `R` and `I`
//! swapped and a zero initial query.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Label;
use crate::text::{cosine_dense, dense_norm, DocumentVector, VocabId, Vocabulary};

pub const BOOST_STEP: f64 = 0.1;
pub const BOOST_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocchioParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub top_k: usize,
}

impl Default for RocchioParams {
    fn default() -> Self {
        RocchioParams {
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
            delta: 0.1,
            top_k: 10,
        }
    }
}

impl RocchioParams {
    pub fn validate(&self) -> Result<(), RelevanceError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.alpha) && unit(self.beta) && unit(self.gamma) && unit(self.delta)) {
            return Err(RelevanceError::InvalidParams("alpha, beta, gamma and delta must lie in [0, 1]"));
        }
        if self.top_k == 0 {
            return Err(RelevanceError::InvalidParams("top_k must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelevanceError {
    #[error("seed vector has no in-vocabulary terms")]
    ZeroSeed,
    #[error("vector for `{0}` was built over a different vocabulary")]
    VocabularyMismatch(String),
    #[error("document `{0}` is in both the relevant and non-relevant sets")]
    Overlap(String),
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    vocab: VocabId,
    params: RocchioParams,
    q0: Vec<f64>,
    q_rel: Vec<f64>,
    q_irr: Vec<f64>,
    boosts: Vec<f64>,
    iteration: u64,
}

/// Label predicted for one document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub confidence: f64,
    /// The document has no in-vocabulary terms.
    pub no_signal: bool,
}

/// Disjoint top and bottom of the ranking of unlabeled documents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Suggestions {
    /// Highest scores first.
    pub predicted_relevant: Vec<(String, f64)>,
    /// Lowest scores first.
    pub predicted_non_relevant: Vec<(String, f64)>,
}

/// Term-keyed sparse view of a model, independent of term indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub iteration: u64,
    pub params: RocchioParams,
    pub boosts: BTreeMap<String, f64>,
    pub q_rel: BTreeMap<String, f64>,
    pub q_irr: BTreeMap<String, f64>,
}

impl RelevanceModel {
    pub fn new(seed: &DocumentVector, dim: usize, params: RocchioParams) -> Result<Self, RelevanceError> {
        params.validate()?;
        if seed.is_empty() {
            return Err(RelevanceError::ZeroSeed);
        }
        let q0 = seed.to_dense(dim);
        Ok(RelevanceModel {
            vocab: seed.vocab,
            params,
            q_rel: q0.clone(),
            q0,
            q_irr: vec![0.0; dim],
            boosts: vec![1.0; dim],
            iteration: 0,
        })
    }

    pub fn params(&self) -> &RocchioParams {
        &self.params
    }

    pub fn set_params(&mut self, params: RocchioParams) -> Result<(), RelevanceError> {
        params.validate()?;
        self.params = params;
        Ok(())
    }

    pub fn vocab(&self) -> VocabId {
        self.vocab
    }

    pub fn q0(&self) -> &[f64] {
        &self.q0
    }

    pub fn q_rel(&self) -> &[f64] {
        &self.q_rel
    }

    pub fn q_irr(&self) -> &[f64] {
        &self.q_irr
    }

    pub fn boosts(&self) -> &[f64] {
        &self.boosts
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Applies one feedback round; `relevant` and `non_relevant` are the full
    /// current label sets, not increments.
    pub fn update(
        &mut self,
        relevant: &[&DocumentVector],
        non_relevant: &[&DocumentVector],
    ) -> Result<(), RelevanceError> {
        for d in relevant.iter().chain(non_relevant) {
            if d.vocab != self.vocab {
                return Err(RelevanceError::VocabularyMismatch(d.doc_id.clone()));
            }
        }
        let rel_ids: BTreeSet<&str> = relevant.iter().map(|d| d.doc_id.as_str()).collect();
        if let Some(d) = non_relevant.iter().find(|d| rel_ids.contains(d.doc_id.as_str())) {
            return Err(RelevanceError::Overlap(d.doc_id.clone()));
        }

        let dim = self.q0.len();
        let mean_rel = centroid(relevant, dim);
        let mean_irr = centroid(non_relevant, dim);
        let RocchioParams { alpha, beta, gamma, delta, .. } = self.params;
        for i in 0..dim {
            let b = self.boosts[i];
            let rel = alpha * self.q_rel[i] + beta * self.q0[i] + mean_rel[i] * (gamma * b)
                - mean_irr[i] * (delta * b);
            let irr = alpha * self.q_irr[i] + mean_irr[i] * (gamma * b) - mean_rel[i] * (delta * b);
            self.q_rel[i] = rel.max(0.0);
            self.q_irr[i] = irr.max(0.0);
        }
        self.iteration += 1;
        Ok(())
    }

    /// Moves a term's boost by `steps` tenths, clamped to `[0, 2]`.
    pub fn set_boost(&mut self, vocab: &Vocabulary, term: &str, steps: i32) -> Result<f64, RelevanceError> {
        let i = vocab
            .index_of(term)
            .ok_or_else(|| RelevanceError::UnknownTerm(term.into()))?;
        let tenths = libm::round(self.boosts[i] / BOOST_STEP) + f64::from(steps);
        let b = tenths.clamp(0.0, BOOST_MAX / BOOST_STEP) * BOOST_STEP;
        self.boosts[i] = libm::round(b * 10.0) / 10.0;
        Ok(self.boosts[i])
    }

    pub fn score(&self, d: &DocumentVector) -> f64 {
        Scorer::new(&self.q_rel, &self.q_irr, &self.boosts).score(d)
    }

    /// Candidates by descending score, ties by ascending id.
    pub fn rank(&self, candidates: &[&DocumentVector]) -> Vec<(String, f64)> {
        rank_documents(&self.q_rel, &self.q_irr, &self.boosts, candidates)
    }

    pub fn suggest(&self, unknown: &[&DocumentVector], k: usize) -> Suggestions {
        let ranked = self.rank(unknown);
        let n = ranked.len();
        let side = k.min(n / 2);
        let mut top: Vec<(String, f64)> = ranked[..side].to_vec();
        let mut bottom: Vec<(String, f64)> = ranked[n - side..].iter().rev().cloned().collect();
        if 2 * k >= n && n % 2 == 1 {
            let mid = ranked[n / 2].clone();
            if mid.1 >= 0.0 {
                top.push(mid);
            } else {
                bottom.push(mid);
            }
        }
        Suggestions {
            predicted_relevant: top,
            predicted_non_relevant: bottom,
        }
    }

    pub fn predict(&self, d: &DocumentVector) -> Prediction {
        if d.is_empty() {
            return Prediction {
                label: Label::Relevant,
                confidence: 0.0,
                no_signal: true,
            };
        }
        let s = self.score(d);
        Prediction {
            label: if s >= 0.0 { Label::Relevant } else { Label::NonRelevant },
            confidence: libm::fabs(s).clamp(0.0, 1.0),
            no_signal: false,
        }
    }

    /// `q_rel ⊙ boosts`, the vector ranking compares documents against.
    pub fn weighted_relevant(&self) -> Vec<f64> {
        hadamard(&self.q_rel, &self.boosts)
    }

    pub fn weighted_non_relevant(&self) -> Vec<f64> {
        hadamard(&self.q_irr, &self.boosts)
    }

    pub fn snapshot(&self, vocab: &Vocabulary) -> ModelSnapshot {
        let sparse = |v: &[f64]| -> BTreeMap<String, f64> {
            v.iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (String::from(vocab.term(i)), *w))
                .collect()
        };
        ModelSnapshot {
            iteration: self.iteration,
            params: self.params,
            boosts: self
                .boosts
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 1.0)
                .map(|(i, b)| (String::from(vocab.term(i)), *b))
                .collect(),
            q_rel: sparse(&self.q_rel),
            q_irr: sparse(&self.q_irr),
        }
    }
}

fn centroid(docs: &[&DocumentVector], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if docs.is_empty() {
        return out;
    }
    for d in docs {
        for &(i, w) in &d.weights {
            out[i as usize] += w;
        }
    }
    let n = docs.len() as f64;
    for x in &mut out {
        *x /= n;
    }
    out
}

fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

struct Scorer {
    rel: Vec<f64>,
    rel_norm: f64,
    irr: Vec<f64>,
    irr_norm: f64,
}

impl Scorer {
    fn new(q_rel: &[f64], q_irr: &[f64], boosts: &[f64]) -> Self {
        let rel = hadamard(q_rel, boosts);
        let irr = hadamard(q_irr, boosts);
        Scorer {
            rel_norm: dense_norm(&rel),
            irr_norm: dense_norm(&irr),
            rel,
            irr,
        }
    }

    fn score(&self, d: &DocumentVector) -> f64 {
        cosine_dense(&self.rel, self.rel_norm, d) - cosine_dense(&self.irr, self.irr_norm, d)
    }
}

/// Scores `cos(d, q_rel ⊙ b) - cos(d, q_irr ⊙ b)` for every candidate and sorts
/// by descending score, ties by ascending id.
pub fn rank_documents(
    q_rel: &[f64],
    q_irr: &[f64],
    boosts: &[f64],
    candidates: &[&DocumentVector],
) -> Vec<(String, f64)> {
    let scorer = Scorer::new(q_rel, q_irr, boosts);
    let mut out: Vec<(String, f64)> = candidates
        .iter()
        .map(|d| (d.doc_id.clone(), scorer.score(d)))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

//! Seeded synthetic corpora with known relevance, for simulation and tests.
//!
//! Document 0 is a relevant systematic review used as the seed. Relevant
//! primary studies are split roughly 50/40/10 between those the seed cites,
//! those reachable only through other relevant reviews, and those outside the
//! initial matrix. Background reviews that share a citation with the seed
//! drag unrelated studies into the matrix as noise. Identifiers are shuffled
//! so their order says nothing about relevance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocType, Document};
use crate::matrix::Label;

pub const DEFAULT_FIXTURE_SEED: u64 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub relevant: Vec<String>,
    pub background: Vec<Vec<String>>,
    /// Words shared by every topic.
    pub common: Vec<String>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(ToString::to_string).collect()
}

impl Default for TopicSpec {
    fn default() -> Self {
        TopicSpec {
            relevant: words(
                "thimerosal vaccine vaccination autism autistic mercury neurodevelopmental \
                 immunization mmr ethylmercury spectrum preservative infants measles \
                 developmental tics encephalopathy",
            ),
            background: alloc::vec![
                words(
                    "hypertension blood pressure cardiovascular statin cholesterol stroke \
                     myocardial infarction heart arterial lipid coronary atrial",
                ),
                words(
                    "cancer tumor chemotherapy breast carcinoma metastatic radiotherapy \
                     lymphoma malignant biopsy mastectomy tamoxifen remission",
                ),
                words(
                    "diabetes insulin glucose glycemic metformin obesity pancreatic \
                     hyperglycemia retinopathy nephropathy weight sulfonylurea",
                ),
                words(
                    "asthma inhaler bronchial corticosteroid wheezing pulmonary copd \
                     spirometry airway exacerbation allergen bronchodilator",
                ),
            ],
            common: words(
                "study patients trial randomized results outcome evidence analysis \
                 controlled participants risk effect data clinical group significant \
                 associated treatment methods conclusion years reported children exposure \
                 cohort diagnosis",
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub truth: BTreeMap<String, Label>,
    pub seed_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("n_relevant ({n_relevant}) exceeds n_docs ({n_docs})")]
    TooManyRelevant { n_docs: usize, n_relevant: usize },
    #[error("a non-empty corpus needs at least one relevant document for the seed")]
    NoSeed,
    #[error("topic vocabulary `{0}` is empty")]
    EmptyTopic(&'static str),
}

struct Plan {
    doc_type: DocType,
    topic: Option<usize>,
    relevant: bool,
    refs: BTreeSet<usize>,
}

const SURNAMES: &[&str] = &[
    "Smith", "Garcia", "Tanaka", "Novak", "Okafor", "Silva", "Larsen", "Kowalski", "Haddad", "Moreau",
    "Rossi", "Nguyen", "Fischer", "Kumar", "Olsen", "Murphy",
];

fn text(rng: &mut ChaCha8Rng, spec: &TopicSpec, topic: Option<usize>, len: usize) -> String {
    let own: &[String] = match topic {
        None => &spec.relevant,
        Some(t) => &spec.background[t],
    };
    let mut out = String::new();
    for i in 0..len {
        let r: f64 = rng.random();
        let pool: &[String] = if r < 0.5 {
            own
        } else if r < 0.6 {
            // cross-talk from some other topic
            let t = rng.random_range(0..=spec.background.len());
            if t == spec.background.len() { &spec.relevant } else { &spec.background[t] }
        } else {
            &spec.common
        };
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&pool[rng.random_range(0..pool.len())]);
    }
    out
}

pub fn generate_synthetic_corpus(
    n_docs: usize,
    n_relevant: usize,
    spec: &TopicSpec,
    seed: u64,
) -> Result<SyntheticCorpus, SyntheticError> {
    if n_relevant > n_docs {
        return Err(SyntheticError::TooManyRelevant { n_docs, n_relevant });
    }
    if n_docs == 0 {
        return Ok(SyntheticCorpus { documents: Vec::new(), truth: BTreeMap::new(), seed_id: None });
    }
    if n_relevant == 0 {
        return Err(SyntheticError::NoSeed);
    }
    if spec.relevant.is_empty() {
        return Err(SyntheticError::EmptyTopic("relevant"));
    }
    if spec.common.is_empty() {
        return Err(SyntheticError::EmptyTopic("common"));
    }
    if spec.background.is_empty() || spec.background.iter().any(Vec::is_empty) {
        return Err(SyntheticError::EmptyTopic("background"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bg = n_docs - n_relevant;
    let rel_sr_count = (n_relevant - 1) / 5;
    let mut plans: Vec<Plan> = Vec::with_capacity(n_docs);
    for i in 0..n_relevant {
        let doc_type = if i <= rel_sr_count { DocType::SystematicReview } else { DocType::PrimaryStudy };
        plans.push(Plan { doc_type, topic: None, relevant: true, refs: BTreeSet::new() });
    }
    const OTHERS: [DocType; 3] = [DocType::Overview, DocType::StructuredSummaryPs, DocType::StructuredSummarySr];
    for j in 0..n_bg {
        let doc_type = if j % 20 == 19 {
            OTHERS[(j / 20) % 3]
        } else if j % 5 == 0 {
            DocType::SystematicReview
        } else {
            DocType::PrimaryStudy
        };
        plans.push(Plan { doc_type, topic: Some(j % spec.background.len()), relevant: false, refs: BTreeSet::new() });
    }

    let rel_sr: Vec<usize> = (1..=rel_sr_count).collect();
    let mut rel_ps: Vec<usize> = (rel_sr_count + 1..n_relevant).collect();
    rel_ps.shuffle(&mut rng);
    let n_ps = rel_ps.len();
    let orphan = n_ps / 10;
    let l1 = if rel_sr.is_empty() { n_ps - orphan } else { n_ps.div_ceil(2) };
    let l3 = n_ps - l1 - orphan;
    let rel_l1 = &rel_ps[..l1];
    let rel_l3 = &rel_ps[l1..l1 + l3];

    let of_type = |t: DocType| -> Vec<usize> { (n_relevant..n_docs).filter(|&i| plans[i].doc_type == t).collect() };
    let mut bg_ps = of_type(DocType::PrimaryStudy);
    bg_ps.shuffle(&mut rng);
    let bg_sr = of_type(DocType::SystematicReview);
    let others: Vec<usize> = (n_relevant..n_docs).filter(|&i| OTHERS.contains(&plans[i].doc_type)).collect();
    let bg_l1_count = (bg_ps.len() * 3).div_ceil(20);
    let (bg_l1, bg_rest) = bg_ps.split_at(bg_l1_count);

    // seed
    plans[0].refs.extend(rel_l1.iter().chain(bg_l1).copied());
    if let Some(&o) = others.first() {
        plans[0].refs.insert(o);
    }
    // other relevant reviews: a shared study plus their slice of the deeper layer
    let l1_all: Vec<usize> = rel_l1.iter().chain(bg_l1).copied().collect();
    for (k, &sr) in rel_sr.iter().enumerate() {
        for _ in 0..rng.random_range(1..=2) {
            if !l1_all.is_empty() {
                plans[sr].refs.insert(l1_all[rng.random_range(0..l1_all.len())]);
            }
        }
        plans[sr].refs.extend(rel_l3.iter().skip(k).step_by(rel_sr.len()).copied());
        if !bg_rest.is_empty() && rng.random_bool(0.3) {
            plans[sr].refs.insert(bg_rest[rng.random_range(0..bg_rest.len())]);
        }
    }
    // background reviews, the first half drifting into the matrix
    for (k, &sr) in bg_sr.iter().enumerate() {
        if k < bg_sr.len() / 2 && !l1_all.is_empty() {
            plans[sr].refs.insert(l1_all[rng.random_range(0..l1_all.len())]);
        }
        if !bg_rest.is_empty() {
            for _ in 0..rng.random_range(2..=5) {
                plans[sr].refs.insert(bg_rest[rng.random_range(0..bg_rest.len())]);
            }
        }
    }
    for &o in &others {
        if !bg_ps.is_empty() {
            for _ in 0..2 {
                plans[o].refs.insert(bg_ps[rng.random_range(0..bg_ps.len())]);
            }
        }
    }

    let width = format!("{}", n_docs.saturating_sub(1)).len().max(4);
    let mut perm: Vec<usize> = (0..n_docs).collect();
    perm.shuffle(&mut rng);
    let ids: Vec<String> = perm.iter().map(|p| format!("d{p:0width$}")).collect();

    let mut documents = Vec::with_capacity(n_docs);
    let mut truth = BTreeMap::new();
    for (i, plan) in plans.iter().enumerate() {
        let title_len = rng.random_range(6..=10);
        let abstract_len = rng.random_range(40..=80);
        let title = text(&mut rng, spec, plan.topic, title_len);
        let abstract_text = text(&mut rng, spec, plan.topic, abstract_len);
        let authors = (0..rng.random_range(1..=5))
            .map(|_| {
                let s = SURNAMES[rng.random_range(0..SURNAMES.len())];
                let initial = (b'A' + rng.random_range(0..26u8)) as char;
                format!("{s} {initial}")
            })
            .collect();
        documents.push(Document {
            id: ids[i].clone(),
            doc_type: plan.doc_type,
            title,
            abstract_text,
            year: Some(rng.random_range(1990..2020)),
            authors,
            references: plan.refs.iter().map(|&r| ids[r].clone()).collect(),
        });
        truth.insert(ids[i].clone(), if plan.relevant { Label::Relevant } else { Label::NonRelevant });
    }
    documents.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SyntheticCorpus { documents, truth, seed_id: Some(ids[0].clone()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::matrix::build_initial_matrix;

    #[test]
    fn empty_request_gives_empty_corpus() {
        let s = generate_synthetic_corpus(0, 0, &TopicSpec::default(), 1).unwrap();
        assert!(s.documents.is_empty() && s.truth.is_empty() && s.seed_id.is_none());
    }

    #[test]
    fn invalid_requests() {
        let spec = TopicSpec::default();
        assert!(matches!(generate_synthetic_corpus(5, 6, &spec, 1), Err(SyntheticError::TooManyRelevant { .. })));
        assert_eq!(generate_synthetic_corpus(5, 0, &spec, 1), Err(SyntheticError::NoSeed));
        let bad = TopicSpec { relevant: Vec::new(), ..TopicSpec::default() };
        assert!(matches!(generate_synthetic_corpus(5, 2, &bad, 1), Err(SyntheticError::EmptyTopic(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = TopicSpec::default();
        let a = generate_synthetic_corpus(80, 15, &spec, 3).unwrap();
        let b = generate_synthetic_corpus(80, 15, &spec, 3).unwrap();
        let c = generate_synthetic_corpus(80, 15, &spec, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn counts_and_matrix_coverage() {
        let spec = TopicSpec::default();
        for (n, r) in [(300, 60), (40, 10), (10, 3), (2, 2), (1, 1)] {
            let s = generate_synthetic_corpus(n, r, &spec, DEFAULT_FIXTURE_SEED).unwrap();
            assert_eq!(s.documents.len(), n);
            assert_eq!(s.truth.len(), n);
            assert_eq!(s.truth.values().filter(|l| **l == Label::Relevant).count(), r);
            let seed = s.seed_id.unwrap();
            assert_eq!(s.truth[&seed], Label::Relevant);
            let corpus = Corpus::from_documents(s.documents);
            assert_eq!(corpus.report().accepted, n);
            let m = build_initial_matrix(&corpus, &seed, "m").unwrap();
            let in_m0 = m.members().filter(|id| s.truth[*id] == Label::Relevant).count();
            assert!(2 * in_m0 >= r, "n={n} r={r} in_m0={in_m0}");
        }
    }

    #[test]
    fn noise_enters_the_matrix() {
        let s = generate_synthetic_corpus(300, 60, &TopicSpec::default(), DEFAULT_FIXTURE_SEED).unwrap();
        let seed = s.seed_id.clone().unwrap();
        let corpus = Corpus::from_documents(s.documents);
        let m = build_initial_matrix(&corpus, &seed, "m").unwrap();
        let noise = m.members().filter(|id| s.truth[*id] == Label::NonRelevant).count();
        let signal = m.members().count() - noise;
        assert!(noise > signal, "noise={noise} signal={signal}");
        // some relevant studies sit outside the initial matrix
        assert!(s.truth.iter().any(|(id, l)| *l == Label::Relevant && !m.contains(id)));
    }
}

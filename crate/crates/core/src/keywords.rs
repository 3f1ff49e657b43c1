//! Word-cloud summaries of document groups and abstract highlighting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::matrix::Label;
use crate::relevance::RelevanceModel;
use crate::text::{Tokenizer, Vocabulary};

pub const DEFAULT_LAMBDA: f64 = 0.6;
pub const DEFAULT_HIGHLIGHT_TERMS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    Frequent,
    Relevance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub method: SummaryMethod,
    pub lambda: Option<f64>,
    /// `(term, score, display_weight)`, descending score.
    pub terms: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeywordError {
    #[error("document group is empty")]
    EmptyGroup,
    #[error("lambda must lie in [0, 1], got {0}")]
    InvalidLambda(f64),
}

fn finish(method: SummaryMethod, lambda: Option<f64>, mut scored: Vec<(String, f64)>, k: usize) -> TermSummary {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    let hi = scored.first().map_or(0.0, |t| t.1);
    let lo = scored.last().map_or(0.0, |t| t.1);
    let terms = scored
        .into_iter()
        .map(|(t, s)| {
            let w = if hi > lo { (s - lo) / (hi - lo) } else { 1.0 };
            (t, s, w)
        })
        .collect();
    TermSummary { method, lambda, terms }
}

fn counts<'a>(tok: &Tokenizer, docs: impl IntoIterator<Item = &'a Document>) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for d in docs {
        for t in tok.tokenize(&d.text()) {
            *m.entry(t).or_insert(0) += 1;
        }
    }
    m
}

/// Top `k` terms by raw token count over the group's title and abstract text.
pub fn top_frequent(docs: &[&Document], k: usize) -> TermSummary {
    let c = counts(&Tokenizer::default(), docs.iter().copied());
    let scored = c.into_iter().map(|(t, n)| (t, n as f64)).collect();
    finish(SummaryMethod::Frequent, None, scored, k)
}

/// Top `k` group terms by `λ·ln p(w|G) + (1-λ)·ln(p(w|G)/p(w))`, both
/// distributions add-one smoothed over `vocab`. Only terms occurring in the
/// group are listed.
pub fn top_relevant(
    group: &[&Document],
    background: &[&Document],
    vocab: &Vocabulary,
    k: usize,
    lambda: f64,
) -> Result<TermSummary, KeywordError> {
    if group.is_empty() {
        return Err(KeywordError::EmptyGroup);
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(KeywordError::InvalidLambda(lambda));
    }
    let tok = Tokenizer::default();
    let in_vocab = |m: BTreeMap<String, u64>| -> BTreeMap<String, u64> {
        m.into_iter().filter(|(t, _)| vocab.index_of(t).is_some()).collect()
    };
    let g = in_vocab(counts(&tok, group.iter().copied()));
    let b = in_vocab(counts(&tok, background.iter().copied()));
    let v = vocab.len() as f64;
    let g_total = g.values().sum::<u64>() as f64 + v;
    let b_total = b.values().sum::<u64>() as f64 + v;
    let scored = g
        .iter()
        .map(|(t, &n)| {
            let pg = (n as f64 + 1.0) / g_total;
            let pb = (b.get(t).copied().unwrap_or(0) as f64 + 1.0) / b_total;
            let score = lambda * libm::log(pg) + (1.0 - lambda) * libm::log(pg / pb);
            (t.clone(), score)
        })
        .collect();
    Ok(finish(SummaryMethod::Relevance, Some(lambda), scored, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightSpan {
    pub start: usize,
    pub end: usize,
    pub polarity: Label,
}

fn top_weighted(weights: &[f64], n: usize) -> Vec<(usize, f64)> {
    let mut w: Vec<(usize, f64)> = weights.iter().copied().enumerate().filter(|(_, x)| *x > 0.0).collect();
    w.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    w.truncate(n);
    w
}

/// Character spans over `title + " " + abstract` of tokens whose term is
/// among the `top_n` weighted terms of either boosted query.
pub fn highlight_spans(
    doc: &Document,
    model: &RelevanceModel,
    vocab: &Vocabulary,
    top_n: usize,
) -> Vec<HighlightSpan> {
    let mut marked: BTreeMap<usize, (Label, f64)> = BTreeMap::new();
    for (i, w) in top_weighted(&model.weighted_relevant(), top_n) {
        marked.insert(i, (Label::Relevant, w));
    }
    for (i, w) in top_weighted(&model.weighted_non_relevant(), top_n) {
        match marked.get(&i) {
            Some((_, rw)) if *rw >= w => {}
            _ => {
                marked.insert(i, (Label::NonRelevant, w));
            }
        }
    }
    Tokenizer::default()
        .spans(&doc.text())
        .into_iter()
        .filter_map(|t| {
            let (polarity, _) = marked.get(&vocab.index_of(&t.term)?)?;
            Some(HighlightSpan { start: t.start, end: t.end, polarity: *polarity })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocType;
    use crate::relevance::RocchioParams;
    use crate::text::build_index;
    use alloc::vec;

    fn doc(id: &str, title: &str, abs: &str) -> Document {
        Document {
            id: id.into(),
            doc_type: DocType::PrimaryStudy,
            title: title.into(),
            abstract_text: abs.into(),
            year: None,
            authors: vec![],
            references: vec![],
        }
    }

    fn terms(s: &TermSummary) -> Vec<(&str, f64)> {
        s.terms.iter().map(|(t, sc, _)| (t.as_str(), *sc)).collect()
    }

    #[test]
    fn frequent_counts() {
        let d = doc("1", "autism autism vaccine", "");
        assert_eq!(terms(&top_frequent(&[&d], 10)), [("autism", 2.0), ("vaccine", 1.0)]);
        assert!(top_frequent(&[], 10).terms.is_empty());
        let a = doc("a", "vaccine", "");
        let b = doc("b", "vaccine", "");
        assert_eq!(terms(&top_frequent(&[&a, &b], 1)), [("vaccine", 2.0)]);
    }

    #[test]
    fn display_weight_min_max() {
        let d = doc("1", "autism autism autism vaccine vaccine trial", "");
        let s = top_frequent(&[&d], 3);
        let w: Vec<f64> = s.terms.iter().map(|t| t.2).collect();
        assert_eq!(w, [1.0, 0.5, 0.0]);
    }

    #[test]
    fn relevance_lambda_one_is_group_frequency() {
        let g1 = doc("g1", "autism autism vaccine", "cohort");
        let o = doc("o", "vaccine vaccine vaccine influenza", "");
        let idx = build_index(&[&g1, &o], 100).unwrap();
        let s = top_relevant(&[&g1], &[&g1, &o], &idx.vocabulary, 10, 1.0).unwrap();
        let order: Vec<&str> = s.terms.iter().map(|t| t.0.as_str()).collect();
        assert_eq!(order, ["autism", "cohort", "vaccine"]);
    }

    #[test]
    fn relevance_group_only_term_wins_at_lambda_zero() {
        // "autism" only inside the group, "vaccine" equally frequent but also outside
        let g = doc("g", "autism vaccine", "");
        let o = doc("o", "vaccine", "");
        let idx = build_index(&[&g, &o], 100).unwrap();
        let s = top_relevant(&[&g], &[&g, &o], &idx.vocabulary, 10, 0.0).unwrap();
        assert_eq!(s.terms[0].0, "autism");
        // hand values: V=2, group counts 1/1, background autism 1, vaccine 2
        let lift_a = libm::log((2.0 / 4.0) / (2.0 / 5.0));
        let lift_v = libm::log((2.0 / 4.0) / (3.0 / 5.0));
        assert!((s.terms[0].1 - lift_a).abs() < 1e-15);
        assert!((s.terms[1].1 - lift_v).abs() < 1e-15);
    }

    #[test]
    fn relevance_group_equals_background() {
        let a = doc("a", "autism autism autism vaccine vaccine", "");
        let b = doc("b", "trial vaccine", "");
        let idx = build_index(&[&a, &b], 100).unwrap();
        let freq: Vec<String> = top_frequent(&[&a, &b], 10).terms.into_iter().map(|t| t.0).collect();
        for lambda in [0.3, 0.6, 1.0] {
            let s = top_relevant(&[&a, &b], &[&a, &b], &idx.vocabulary, 10, lambda).unwrap();
            let order: Vec<String> = s.terms.iter().map(|t| t.0.clone()).collect();
            assert_eq!(order, freq);
        }
        // with no lift and no frequency term every score is zero
        let s = top_relevant(&[&a, &b], &[&a, &b], &idx.vocabulary, 10, 0.0).unwrap();
        assert!(s.terms.iter().all(|t| t.1 == 0.0 && t.2 == 1.0));
    }

    #[test]
    fn relevance_errors() {
        let a = doc("a", "autism", "");
        let idx = build_index(&[&a], 10).unwrap();
        assert_eq!(top_relevant(&[], &[&a], &idx.vocabulary, 5, 0.6), Err(KeywordError::EmptyGroup));
        assert!(matches!(
            top_relevant(&[&a], &[&a], &idx.vocabulary, 5, 1.5),
            Err(KeywordError::InvalidLambda(_))
        ));
    }

    #[test]
    fn highlight_polarities_and_offsets() {
        let seed = doc("s", "vaccine", "");
        let other = doc("o", "autism", "");
        let target = doc("t", "", "vaccine autism vaccine");
        let idx = build_index(&[&seed, &other], 10).unwrap();
        let vocab = &idx.vocabulary;
        let mut m = RelevanceModel::new(&idx.vectors[0], vocab.len(), RocchioParams::default()).unwrap();
        m.update(&[&idx.vectors[0]], &[&idx.vectors[1]]).unwrap();
        let spans = highlight_spans(&target, &m, vocab, 25);
        // text = "" + " " + "vaccine autism vaccine"
        assert_eq!(
            spans,
            [
                HighlightSpan { start: 1, end: 8, polarity: Label::Relevant },
                HighlightSpan { start: 9, end: 15, polarity: Label::NonRelevant },
                HighlightSpan { start: 16, end: 23, polarity: Label::Relevant },
            ]
        );
    }

    #[test]
    fn highlight_one_sided_and_no_match() {
        let seed = doc("s", "vaccine autism", "");
        let idx = build_index(&[&seed], 10).unwrap();
        let m = RelevanceModel::new(&idx.vectors[0], idx.vocabulary.len(), RocchioParams::default()).unwrap();
        let d = doc("d", "autism in vaccine trials", "");
        let spans = highlight_spans(&d, &m, &idx.vocabulary, 25);
        assert_eq!(spans.len(), 2);
        assert!(spans.iter().all(|s| s.polarity == Label::Relevant));
        let none = doc("n", "influenza", "measles mumps");
        assert!(highlight_spans(&none, &m, &idx.vocabulary, 25).is_empty());
    }
}

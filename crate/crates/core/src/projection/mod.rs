//! Two-dimensional projections of matrix documents for the overview scatter.
//!
//! Every method returns coordinates rescaled per axis into `[-1, 1]`. PCA,
//! LDA and MDS can also place out-of-sample vectors (the relevance queries)
//! with the fitted transform; t-SNE cannot.

pub mod lda;
pub mod mds;
pub mod pca;
pub mod tsne;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Label;
use crate::text::{cosine, dense_norm, DocumentVector};

use pca::SparseRow;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Lda,
    Mds,
    Tsne,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pca, Method::Lda, Method::Mds, Method::Tsne];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Lda => "lda",
            Method::Mds => "mds",
            Method::Tsne => "tsne",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ProjectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ProjectionError::UnknownMethod(s.into()))
    }
}

/// Method-specific diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quality {
    Pca {
        explained_variance: [f64; 2],
    },
    Lda {
        separation_ratio: f64,
    },
    /// LDA was requested but could not run; PCA coordinates are returned.
    PcaFallback {
        reason: String,
        explained_variance: [f64; 2],
    },
    Mds {
        stress: f64,
    },
    Tsne {
        kl_divergence: f64,
        kl_after_exaggeration: f64,
        perplexity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub method: Method,
    pub seed: u64,
    pub quality: Quality,
    pub coords: BTreeMap<String, [f64; 2]>,
    /// All input vectors coincide; coordinates are all zero.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("need at least 3 documents with non-empty vectors, got {0}")]
    TooFewDocuments(usize),
    #[error("unknown projection method `{0}`")]
    UnknownMethod(String),
}

/// A query position, absent where the method cannot place new points.
pub type Placed = Option<[f64; 2]>;

/// Divides each axis by its largest absolute value; all-zero axes stay zero.
pub fn rescale(coords: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let f = axis_scale(coords);
    coords.iter().map(|c| apply_scale(*c, f)).collect()
}

fn axis_scale(coords: &[[f64; 2]]) -> [f64; 2] {
    let mut m = [0.0f64; 2];
    for c in coords {
        m[0] = m[0].max(libm::fabs(c[0]));
        m[1] = m[1].max(libm::fabs(c[1]));
    }
    m
}

fn apply_scale(c: [f64; 2], f: [f64; 2]) -> [f64; 2] {
    let s = |x: f64, m: f64| if m > 0.0 { x / m } else { 0.0 };
    [s(c[0], f[0]), s(c[1], f[1])]
}

pub fn project(
    vectors: &[&DocumentVector],
    dim: usize,
    labels: &BTreeMap<String, Label>,
    method: Method,
    seed: u64,
) -> Result<Projection, ProjectionError> {
    project_with_queries(vectors, dim, labels, method, seed, &[]).map(|(p, _)| p)
}

/// Like [`project`], also placing each dense query vector (normalized to unit
/// length) with the fitted transform. Entries are `None` for zero queries and
/// for t-SNE.
pub fn project_with_queries(
    vectors: &[&DocumentVector],
    dim: usize,
    labels: &BTreeMap<String, Label>,
    method: Method,
    seed: u64,
    queries: &[&[f64]],
) -> Result<(Projection, Vec<Placed>), ProjectionError> {
    let nonzero = vectors.iter().filter(|v| !v.is_empty()).count();
    if nonzero < 3 {
        return Err(ProjectionError::TooFewDocuments(nonzero));
    }
    let n = vectors.len();
    let rows: Vec<SparseRow<'_>> = vectors.iter().map(|v| v.weights.as_slice()).collect();
    let unit_queries: Vec<Option<Vec<f64>>> = queries
        .iter()
        .map(|q| {
            let norm = dense_norm(q);
            (norm > 0.0).then(|| q.iter().map(|x| x / norm).collect())
        })
        .collect();

    let pca_result = |rows: &[SparseRow<'_>]| {
        let fit = pca::fit(rows, dim);
        let placed: Vec<Option<[f64; 2]>> = unit_queries
            .iter()
            .map(|q| q.as_ref().map(|q| fit.transform(rows, q)))
            .collect();
        (fit, placed)
    };

    let (raw, quality, degenerate, placed) = match method {
        Method::Pca => {
            let (fit, placed) = pca_result(&rows);
            let q = Quality::Pca { explained_variance: fit.explained_variance };
            (fit.coords, q, fit.degenerate, placed)
        }
        Method::Lda => {
            let pick = |want: Label| -> Vec<usize> {
                (0..n)
                    .filter(|&i| labels.get(&vectors[i].doc_id) == Some(&want))
                    .collect()
            };
            let (rel, irr) = (pick(Label::Relevant), pick(Label::NonRelevant));
            let fitted = if rel.len() >= 2 && irr.len() >= 2 {
                lda::fit(&rows, dim, &rel, &irr).ok_or("classes are not separable in the data span")
            } else {
                Err("needs at least 2 relevant and 2 non-relevant documents")
            };
            match fitted {
                Ok(fit) => {
                    let placed = unit_queries
                        .iter()
                        .map(|q| q.as_ref().map(|q| fit.transform(&rows, q)))
                        .collect();
                    let q = Quality::Lda { separation_ratio: fit.separation_ratio };
                    (fit.coords, q, false, placed)
                }
                Err(reason) => {
                    let (fit, placed) = pca_result(&rows);
                    let q = Quality::PcaFallback {
                        reason: reason.into(),
                        explained_variance: fit.explained_variance,
                    };
                    (fit.coords, q, fit.degenerate, placed)
                }
            }
        }
        Method::Mds => {
            let dist = cosine_distances(vectors);
            let fit = mds::fit(&dist, n);
            let placed = unit_queries
                .iter()
                .map(|q| {
                    q.as_ref().map(|q| {
                        let d: Vec<f64> = vectors.iter().map(|v| query_distance(q, v)).collect();
                        fit.transform(&d)
                    })
                })
                .collect();
            let q = Quality::Mds { stress: fit.stress };
            (fit.coords, q, fit.degenerate, placed)
        }
        Method::Tsne => {
            let dist = cosine_distances(vectors);
            let config = tsne::TsneConfig { seed, ..Default::default() };
            let fit = tsne::fit(&dist, n, &config);
            let q = Quality::Tsne {
                kl_divergence: fit.kl_divergence,
                kl_after_exaggeration: fit.kl_after_exaggeration,
                perplexity: fit.perplexity,
            };
            (fit.coords, q, false, alloc::vec![None; queries.len()])
        }
    };

    let scale = axis_scale(&raw);
    let coords = vectors
        .iter()
        .zip(&raw)
        .map(|(v, c)| (v.doc_id.clone(), apply_scale(*c, scale)))
        .collect();
    let placed = placed.into_iter().map(|p| p.map(|c| apply_scale(c, scale))).collect();
    Ok((
        Projection {
            method,
            seed,
            quality,
            coords,
            degenerate,
        },
        placed,
    ))
}

/// `1 - cosine` for every pair, clamped at zero.
pub fn cosine_distances(vectors: &[&DocumentVector]) -> Vec<f64> {
    let n = vectors.len();
    let mut d = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let x = (1.0 - cosine(vectors[i], vectors[j])).max(0.0);
            d[i * n + j] = x;
            d[j * n + i] = x;
        }
    }
    d
}

fn query_distance(unit_query: &[f64], v: &DocumentVector) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 1.0;
    }
    let dot: f64 = v.weights.iter().map(|&(i, w)| w * unit_query[i as usize]).sum();
    (1.0 - dot / norm).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::VocabId;

    fn v(id: &str, dense: &[f64]) -> DocumentVector {
        let norm = libm::sqrt(dense.iter().map(|x| x * x).sum());
        DocumentVector {
            doc_id: id.into(),
            vocab: VocabId(1),
            weights: dense
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, w / norm))
                .collect(),
        }
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale(&[[-2.0, 0.0], [4.0, 0.0]]), [[-0.5, 0.0], [1.0, 0.0]]);
        let once = rescale(&[[3.0, -7.0], [1.0, 2.0], [-0.5, 1.0]]);
        assert_eq!(rescale(&once), once);
    }

    #[test]
    fn every_method_covers_all_ids_within_unit_box() {
        let docs = [
            v("a", &[1.0, 0.2, 0.0, 0.0]),
            v("b", &[0.9, 0.1, 0.1, 0.0]),
            v("c", &[0.0, 1.0, 0.8, 0.0]),
            v("d", &[0.1, 0.9, 1.0, 0.2]),
            v("e", &[0.0, 0.0, 0.3, 1.0]),
            v("z", &[]),
        ];
        let refs: Vec<&DocumentVector> = docs.iter().collect();
        let labels: BTreeMap<String, Label> = [
            ("a".into(), Label::Relevant),
            ("b".into(), Label::Relevant),
            ("c".into(), Label::NonRelevant),
            ("d".into(), Label::NonRelevant),
        ]
        .into();
        for m in Method::ALL {
            let (p, placed) =
                project_with_queries(&refs, 4, &labels, m, DEFAULT_SEED, &[&[1.0, 0.0, 0.0, 0.0], &[0.0; 4]]).unwrap();
            assert_eq!(p.coords.len(), 6, "{m}");
            assert!(p.coords.keys().eq(["a", "b", "c", "d", "e", "z"].iter()));
            let mx = p.coords.values().map(|c| libm::fabs(c[0])).fold(0.0, f64::max);
            let my = p.coords.values().map(|c| libm::fabs(c[1])).fold(0.0, f64::max);
            assert!((mx - 1.0).abs() < 1e-15 && (my - 1.0).abs() < 1e-15, "{m}");
            assert_eq!(placed[1], None);
            assert_eq!(placed[0].is_some(), m != Method::Tsne);
        }
    }

    #[test]
    fn lda_without_labels_falls_back_to_pca() {
        let docs = [v("a", &[1.0, 0.0]), v("b", &[0.0, 1.0]), v("c", &[1.0, 1.0])];
        let refs: Vec<&DocumentVector> = docs.iter().collect();
        let p = project(&refs, 2, &BTreeMap::new(), Method::Lda, 0).unwrap();
        assert!(matches!(p.quality, Quality::PcaFallback { .. }));
        assert_eq!(p.method, Method::Lda);
    }

    #[test]
    fn too_few_documents() {
        let docs = [v("a", &[1.0]), v("b", &[1.0]), v("c", &[])];
        let refs: Vec<&DocumentVector> = docs.iter().collect();
        assert_eq!(
            project(&refs, 1, &BTreeMap::new(), Method::Pca, 0),
            Err(ProjectionError::TooFewDocuments(2))
        );
    }

    #[test]
    fn identical_vectors_are_degenerate() {
        let docs = [v("a", &[1.0, 1.0]), v("b", &[1.0, 1.0]), v("c", &[1.0, 1.0])];
        let refs: Vec<&DocumentVector> = docs.iter().collect();
        for m in [Method::Pca, Method::Mds] {
            let p = project(&refs, 2, &BTreeMap::new(), m, 0).unwrap();
            assert!(p.degenerate);
            assert!(p.coords.values().all(|c| *c == [0.0, 0.0]));
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("umap".parse::<Method>().is_err());
    }
}

//! Algorithms for curating evidence matrices.
//!
//! An evidence matrix lists the systematic reviews (rows) and primary studies
//! (columns) that answer one clinical question. This crate builds the initial
//! matrix from a citation graph, indexes the matrix documents as TF-IDF
//! vectors, and maintains a Rocchio relevance model that ranks, predicts and
//! summarizes documents while a reviewer labels them. It also provides 2D
//! projections (PCA, LDA, classical MDS, exact t-SNE) for an overview scatter.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence,
//! the HTTP API and the command line live in the `evmatrix` crate.

#![no_std]
#![deny(unsafe_code)]
// dense numeric kernels read better with explicit indices
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod corpus;
pub mod keywords;
pub mod linalg;
pub mod matrix;
pub mod projection;
pub mod relevance;
pub mod session;
pub mod simulate;
pub mod synthetic;
pub mod text;

pub use corpus::{CitationGraph, Corpus, CorpusError, DocType, Document, Direction, IngestReport};
pub use matrix::{
    build_initial_matrix, EvidenceMatrix, Label, Layer, MatrixError, MatrixExport,
};
pub use projection::{project, rescale, Method, Projection, ProjectionError, Quality};
pub use relevance::{Prediction, RelevanceError, RelevanceModel, RocchioParams, Suggestions};
pub use text::{build_index, cosine, tokenize, DocumentVector, Index, Vocabulary};

//! Evidence matrix construction from a seed systematic review.
//!
//! The initial matrix is grown in exactly three breadth-first steps over the
//! citation graph:
//!
//! 1. primary studies cited by the seed become the first columns (L1),
//! 2. other systematic reviews citing any L1 study become rows (L2),
//! 3. primary studies cited by any L2 review and not yet present become the
//!    remaining columns (L3).
//!
//! Only systematic reviews are rows and only primary studies are columns;
//! other publication types met during traversal are skipped.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, DocType, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Relevant,
    NonRelevant,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relevant => "relevant",
            Label::NonRelevant => "non_relevant",
            Label::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "relevant" => Some(Label::Relevant),
            "non_relevant" => Some(Label::NonRelevant),
            "unknown" => Some(Label::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    #[serde(rename = "seed")]
    Seed,
    #[serde(rename = "L1_PS")]
    L1Ps,
    #[serde(rename = "L2_SR")]
    L2Sr,
    #[serde(rename = "L3_PS")]
    L3Ps,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("seed `{0}` is not a systematic review")]
    SeedNotReview(String),
    #[error("document `{0}` is not part of the matrix")]
    NotInMatrix(String),
    #[error("malformed matrix export: {0}")]
    InvalidExport(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceMatrix {
    pub matrix_id: String,
    pub seed_id: String,
    /// Seed first, then L2 reviews in discovery order.
    pub rows: Vec<String>,
    /// L1 studies then L3 studies in discovery order.
    pub cols: Vec<String>,
    pub cells: BTreeSet<(String, String)>,
    pub labels: BTreeMap<String, Label>,
    pub layers: BTreeMap<String, Layer>,
}

pub fn build_initial_matrix(
    corpus: &Corpus,
    seed_id: &str,
    matrix_id: &str,
) -> Result<EvidenceMatrix, MatrixError> {
    let seed = corpus.document(seed_id)?;
    if seed.doc_type != DocType::SystematicReview {
        return Err(MatrixError::SeedNotReview(seed_id.into()));
    }
    let is = |id: &str, t: DocType| corpus.get(id).is_some_and(|d| d.doc_type == t);

    let mut layers = BTreeMap::new();
    layers.insert(String::from(seed_id), Layer::Seed);

    let mut cols = Vec::new();
    for p in corpus.neighbors(seed_id, Direction::Cites)? {
        if is(p, DocType::PrimaryStudy) && !layers.contains_key(p) {
            layers.insert(p.clone(), Layer::L1Ps);
            cols.push(p.clone());
        }
    }

    let mut rows = alloc::vec![String::from(seed_id)];
    for p in &cols {
        for s in corpus.neighbors(p, Direction::CitedBy)? {
            if is(s, DocType::SystematicReview) && !layers.contains_key(s) {
                layers.insert(s.clone(), Layer::L2Sr);
                rows.push(s.clone());
            }
        }
    }

    for s in &rows[1..] {
        for p in corpus.neighbors(s, Direction::Cites)? {
            if is(p, DocType::PrimaryStudy) && !layers.contains_key(p) {
                layers.insert(p.clone(), Layer::L3Ps);
                cols.push(p.clone());
            }
        }
    }

    let col_set: BTreeSet<&String> = cols.iter().collect();
    let mut cells = BTreeSet::new();
    for r in &rows {
        for c in corpus.neighbors(r, Direction::Cites)? {
            if col_set.contains(c) {
                cells.insert((r.clone(), c.clone()));
            }
        }
    }

    let mut labels: BTreeMap<String, Label> =
        layers.keys().map(|k| (k.clone(), Label::Unknown)).collect();
    labels.insert(String::from(seed_id), Label::Relevant);

    Ok(EvidenceMatrix {
        matrix_id: matrix_id.into(),
        seed_id: seed_id.into(),
        rows,
        cols,
        cells,
        labels,
        layers,
    })
}

/// Serialized matrix: the JSON export record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub matrix_id: String,
    pub seed_id: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<(String, String)>,
    pub labels: BTreeMap<String, Label>,
}

impl EvidenceMatrix {
    /// Rows followed by columns.
    pub fn members(&self) -> impl Iterator<Item = &String> {
        self.rows.iter().chain(self.cols.iter())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.layers.contains_key(id)
    }

    pub fn label(&self, id: &str) -> Option<Label> {
        self.labels.get(id).copied()
    }

    pub fn set_label(&mut self, id: &str, label: Label) -> Result<(), MatrixError> {
        match self.labels.get_mut(id) {
            Some(l) => {
                *l = label;
                Ok(())
            }
            None => Err(MatrixError::NotInMatrix(id.into())),
        }
    }

    pub fn ids_with_label(&self, label: Label) -> impl Iterator<Item = &String> {
        self.members().filter(move |id| self.labels[*id] == label)
    }

    pub fn export(&self, only_relevant: bool) -> MatrixExport {
        let keep = |id: &String| !only_relevant || self.labels[id] == Label::Relevant;
        let rows: Vec<String> = self.rows.iter().filter(|r| keep(r)).cloned().collect();
        let cols: Vec<String> = self.cols.iter().filter(|c| keep(c)).cloned().collect();
        let cells = self
            .cells
            .iter()
            .filter(|(r, c)| keep(r) && keep(c))
            .cloned()
            .collect();
        let labels = self
            .labels
            .iter()
            .filter(|(id, _)| keep(id))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        MatrixExport {
            matrix_id: self.matrix_id.clone(),
            seed_id: self.seed_id.clone(),
            rows,
            cols,
            cells,
            labels,
        }
    }

    /// Rebuilds a full (unrestricted) export; layers are recovered from the
    /// seed's cells since L1 columns are exactly the columns the seed cites.
    pub fn from_export(e: MatrixExport) -> Result<EvidenceMatrix, MatrixError> {
        let bad = |m: &str| MatrixError::InvalidExport(m.into());
        if e.rows.first() != Some(&e.seed_id) {
            return Err(bad("first row must be the seed"));
        }
        let cells: BTreeSet<(String, String)> = e.cells.into_iter().collect();
        let mut layers = BTreeMap::new();
        layers.insert(e.seed_id.clone(), Layer::Seed);
        for r in &e.rows[1..] {
            if layers.insert(r.clone(), Layer::L2Sr).is_some() {
                return Err(bad("duplicate row"));
            }
        }
        for c in &e.cols {
            let layer = if cells.contains(&(e.seed_id.clone(), c.clone())) {
                Layer::L1Ps
            } else {
                Layer::L3Ps
            };
            if layers.insert(c.clone(), layer).is_some() {
                return Err(bad("document is both row and column or repeated"));
            }
        }
        if cells
            .iter()
            .any(|(r, c)| !layers.contains_key(r) || !matches!(layers.get(c), Some(Layer::L1Ps | Layer::L3Ps)))
        {
            return Err(bad("cell outside rows x cols"));
        }
        if e.labels.len() != layers.len() || e.labels.keys().any(|k| !layers.contains_key(k)) {
            return Err(bad("labels must cover exactly rows and cols"));
        }
        Ok(EvidenceMatrix {
            matrix_id: e.matrix_id,
            seed_id: e.seed_id,
            rows: e.rows,
            cols: e.cols,
            cells,
            labels: e.labels,
            layers,
        })
    }
}

impl MatrixExport {
    /// Row-major presence grid, `grid[i][j]` for `rows[i]` x `cols[j]`.
    pub fn grid(&self) -> Vec<Vec<bool>> {
        let cells: BTreeSet<(&str, &str)> =
            self.cells.iter().map(|(r, c)| (r.as_str(), c.as_str())).collect();
        self.rows
            .iter()
            .map(|r| {
                self.cols
                    .iter()
                    .map(|c| cells.contains(&(r.as_str(), c.as_str())))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use alloc::string::ToString;
    use alloc::vec;

    fn doc(id: &str, t: DocType, refs: &[&str]) -> Document {
        Document {
            id: id.into(),
            doc_type: t,
            title: id.into(),
            abstract_text: String::new(),
            year: None,
            authors: vec![],
            references: refs.iter().map(|r| r.to_string()).collect(),
        }
    }

    fn five_node() -> Corpus {
        use DocType::*;
        Corpus::from_documents([
            doc("S", SystematicReview, &["P1", "P2"]),
            doc("S2", SystematicReview, &["P1", "P3"]),
            doc("P1", PrimaryStudy, &[]),
            doc("P2", PrimaryStudy, &[]),
            doc("P3", PrimaryStudy, &[]),
        ])
    }

    fn pair(r: &str, c: &str) -> (String, String) {
        (r.into(), c.into())
    }

    #[test]
    fn five_node_fixture() {
        let m = build_initial_matrix(&five_node(), "S", "m1").unwrap();
        assert_eq!(m.rows, ["S", "S2"]);
        assert_eq!(m.cols, ["P1", "P2", "P3"]);
        let expected: BTreeSet<_> =
            [pair("S", "P1"), pair("S", "P2"), pair("S2", "P1"), pair("S2", "P3")].into();
        assert_eq!(m.cells, expected);
        assert_eq!(m.layers["S"], Layer::Seed);
        assert_eq!(m.layers["P1"], Layer::L1Ps);
        assert_eq!(m.layers["P2"], Layer::L1Ps);
        assert_eq!(m.layers["S2"], Layer::L2Sr);
        assert_eq!(m.layers["P3"], Layer::L3Ps);
        assert_eq!(m.labels["S"], Label::Relevant);
        assert!(["S2", "P1", "P2", "P3"].iter().all(|d| m.labels[*d] == Label::Unknown));
    }

    #[test]
    fn seed_without_references() {
        let c = Corpus::from_documents([doc("S", DocType::SystematicReview, &[])]);
        let m = build_initial_matrix(&c, "S", "m").unwrap();
        assert_eq!(m.rows, ["S"]);
        assert!(m.cols.is_empty() && m.cells.is_empty());
    }

    #[test]
    fn non_ps_types_are_skipped() {
        use DocType::*;
        let c = Corpus::from_documents([
            doc("S", SystematicReview, &["O", "P"]),
            doc("O", Overview, &[]),
            doc("P", PrimaryStudy, &[]),
            doc("SS", StructuredSummarySr, &["P"]),
        ]);
        let m = build_initial_matrix(&c, "S", "m").unwrap();
        assert_eq!(m.cols, ["P"]);
        assert_eq!(m.rows, ["S"]);
        assert!(!m.contains("O") && !m.contains("SS"));
    }

    #[test]
    fn stops_after_third_layer() {
        use DocType::*;
        // S3 cites only an L3 study, so it must not become a row
        let c = Corpus::from_documents([
            doc("S", SystematicReview, &["P1"]),
            doc("S2", SystematicReview, &["P1", "P2"]),
            doc("S3", SystematicReview, &["P2", "P4"]),
            doc("P1", PrimaryStudy, &[]),
            doc("P2", PrimaryStudy, &[]),
            doc("P4", PrimaryStudy, &[]),
        ]);
        let m = build_initial_matrix(&c, "S", "m").unwrap();
        assert_eq!(m.rows, ["S", "S2"]);
        assert_eq!(m.cols, ["P1", "P2"]);
    }

    #[test]
    fn seed_errors() {
        let c = five_node();
        assert!(matches!(
            build_initial_matrix(&c, "nope", "m"),
            Err(MatrixError::Corpus(CorpusError::UnknownDocument(_)))
        ));
        assert_eq!(
            build_initial_matrix(&c, "P1", "m"),
            Err(MatrixError::SeedNotReview("P1".into()))
        );
    }

    #[test]
    fn export_only_relevant() {
        let mut m = build_initial_matrix(&five_node(), "S", "m1").unwrap();
        let e = m.export(true);
        assert_eq!(e.rows, ["S"]);
        assert!(e.cols.is_empty());

        m.set_label("P1", Label::Relevant).unwrap();
        m.set_label("S2", Label::Relevant).unwrap();
        let e = m.export(true);
        assert_eq!(e.rows, ["S", "S2"]);
        assert_eq!(e.cols, ["P1"]);
        assert_eq!(e.cells, [pair("S", "P1"), pair("S2", "P1")]);
    }

    #[test]
    fn full_export_round_trips() {
        let mut m = build_initial_matrix(&five_node(), "S", "m1").unwrap();
        m.set_label("P3", Label::NonRelevant).unwrap();
        let back = EvidenceMatrix::from_export(m.export(false)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn grid_matches_cells() {
        let m = build_initial_matrix(&five_node(), "S", "m1").unwrap();
        assert_eq!(
            m.export(false).grid(),
            [[true, true, false], [true, false, true]]
        );
    }

    #[test]
    fn set_label_outside_matrix_fails() {
        let mut m = build_initial_matrix(&five_node(), "S", "m1").unwrap();
        assert_eq!(
            m.set_label("X", Label::Relevant),
            Err(MatrixError::NotInMatrix("X".into()))
        );
    }
}

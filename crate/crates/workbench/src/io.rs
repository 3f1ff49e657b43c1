//! Corpus, truth-label and matrix file formats.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use evmatrix_core::corpus::CorpusBuilder;
use evmatrix_core::{Corpus, Document, Label, MatrixExport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: label for `{id}` must be relevant or non_relevant")]
    BadTruthLabel { path: PathBuf, id: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.to_path_buf(), source }
}

/// Reads JSON-lines records. Lines that are not a valid record are skipped
/// and reported by 1-based line number; blank lines are ignored.
pub fn read_corpus<R: BufRead>(reader: R) -> std::io::Result<Corpus> {
    let mut builder = CorpusBuilder::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Document>(&line) {
            Ok(doc) => {
                let _ = builder.push(doc);
            }
            Err(_) => builder.note_malformed(i + 1),
        }
    }
    Ok(builder.finish())
}

pub fn load_corpus(path: &Path) -> Result<Corpus, IoError> {
    let f = File::open(path).map_err(file_err(path))?;
    read_corpus(BufReader::new(f)).map_err(file_err(path))
}

pub fn write_corpus<'a>(path: &Path, docs: impl IntoIterator<Item = &'a Document>) -> Result<(), IoError> {
    let f = File::create(path).map_err(file_err(path))?;
    let mut w = BufWriter::new(f);
    for d in docs {
        let line = serde_json::to_string(d).map_err(|source| IoError::Json { path: path.into(), source })?;
        writeln!(w, "{line}").map_err(file_err(path))?;
    }
    w.flush().map_err(file_err(path))
}

/// Truth labels as a JSON object `{doc_id: "relevant" | "non_relevant"}`.
pub fn load_truth(path: &Path) -> Result<BTreeMap<String, Label>, IoError> {
    let text = std::fs::read_to_string(path).map_err(file_err(path))?;
    let truth: BTreeMap<String, Label> =
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.into(), source })?;
    if let Some((id, _)) = truth.iter().find(|(_, l)| **l == Label::Unknown) {
        return Err(IoError::BadTruthLabel { path: path.into(), id: id.clone() });
    }
    Ok(truth)
}

pub fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json { path: path.into(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(file_err(path))
}

/// Rows × cols grid with a header row of column ids and `1`/`0` cells.
pub fn write_matrix_csv<W: Write>(writer: W, export: &MatrixExport) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(export.cols.iter().cloned());
    w.write_record(&header)?;
    for (row, cells) in export.rows.iter().zip(export.grid()) {
        let mut rec = vec![row.clone()];
        rec.extend(cells.into_iter().map(|c| if c { "1" } else { "0" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

//! On-disk layout and durable matrix sessions.
//!
//! ```text
//! <data>/corpora/<corpus_id>/corpus.jsonl
//! <data>/matrices/<matrix_id>/events.jsonl   append-only, one event per line
//! <data>/matrices/<matrix_id>/snapshot.json  optional, rewritten atomically
//! ```
//!
//! The event log is the source of truth. A snapshot only shortens replay and
//! is ignored if it does not agree with the log.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use evmatrix_core::session::{EventPayload, SessionError, SessionEvent, SessionSnapshot, SessionState};
use evmatrix_core::Corpus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{load_corpus, write_corpus, IoError};

pub const DEFAULT_SNAPSHOT_EVERY: u64 = 50;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line} is not a valid event: {source}")]
    CorruptLog { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{0}: log is empty")]
    EmptyLog(PathBuf),
    #[error("matrix `{0}` already exists")]
    MatrixExists(String),
    #[error("unknown matrix `{0}`")]
    UnknownMatrix(String),
    #[error("unknown corpus `{0}`")]
    UnknownCorpus(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] IoError),
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::File { path: path.to_path_buf(), source }
}

/// Root of a workbench data directory.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for sub in ["corpora", "matrices"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(file_err(&p))?;
        }
        Ok(DataDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus_file(&self, id: &str) -> PathBuf {
        self.root.join("corpora").join(id).join("corpus.jsonl")
    }

    pub fn matrix_dir(&self, id: &str) -> PathBuf {
        self.root.join("matrices").join(id)
    }

    fn list(&self, sub: &str) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join(sub);
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(file_err(&dir))? {
            let entry = entry.map_err(file_err(&dir))?;
            if entry.path().is_dir() {
                if let Some(name) = entry.file_name().to_str() {
                    out.push(name.to_string());
                }
            }
        }
        out.sort_by_key(|a| natural_key(a));
        Ok(out)
    }

    pub fn corpus_ids(&self) -> Result<Vec<String>, StoreError> {
        Ok(self.list("corpora")?.into_iter().filter(|id| self.corpus_file(id).is_file()).collect())
    }

    pub fn matrix_ids(&self) -> Result<Vec<String>, StoreError> {
        Ok(self.list("matrices")?.into_iter().filter(|id| self.matrix_dir(id).join(LOG_FILE).is_file()).collect())
    }

    /// `m<N>` with N one past the largest numeric suffix in use.
    pub fn next_matrix_id(&self) -> Result<String, StoreError> {
        let max = self
            .list("matrices")?
            .iter()
            .filter_map(|id| id.strip_prefix('m')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        Ok(format!("m{}", max + 1))
    }

    pub fn save_corpus(&self, id: &str, corpus: &Corpus) -> Result<PathBuf, StoreError> {
        let path = self.corpus_file(id);
        let dir = path.parent().expect("corpus file has a parent");
        fs::create_dir_all(dir).map_err(file_err(dir))?;
        write_corpus(&path, corpus.documents())?;
        Ok(path)
    }

    pub fn load_corpus(&self, id: &str) -> Result<Corpus, StoreError> {
        let path = self.corpus_file(id);
        if !path.is_file() {
            return Err(StoreError::UnknownCorpus(id.into()));
        }
        Ok(load_corpus(&path)?)
    }

    /// Reads the first event of a matrix log, which names its corpus.
    pub fn matrix_create_event(&self, id: &str) -> Result<SessionEvent, StoreError> {
        let path = self.matrix_dir(id).join(LOG_FILE);
        if !path.is_file() {
            return Err(StoreError::UnknownMatrix(id.into()));
        }
        let (events, _) = read_log(&path)?;
        events.into_iter().next().ok_or(StoreError::EmptyLog(path))
    }
}

fn natural_key(s: &str) -> (String, u64, String) {
    let digits_at = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
    let (head, tail) = s.split_at(digits_at);
    let end = tail.find(|c: char| !c.is_ascii_digit()).unwrap_or(tail.len());
    let n = tail[..end].parse().unwrap_or(0);
    (head.to_string(), n, tail[end..].to_string())
}

const LOG_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

/// Parses a log. A final line without its newline is a torn write and is
/// dropped; the returned length is the byte offset of the valid prefix.
fn read_log(path: &Path) -> Result<(Vec<SessionEvent>, u64), StoreError> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(file_err(path))?;
    let valid = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let text = String::from_utf8_lossy(&bytes[..valid]);
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(line).map_err(|source| StoreError::CorruptLog {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        events.push(e);
    }
    Ok((events, valid as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredSnapshot {
    create: SessionEvent,
    state: SessionSnapshot,
}

/// A matrix session backed by its event log.
#[derive(Debug)]
pub struct DurableSession {
    pub state: SessionState,
    dir: PathBuf,
    log: File,
    snapshot_every: u64,
    create: SessionEvent,
}

impl DurableSession {
    /// Starts a new log with the given create event.
    pub fn create(dir: &Path, corpus: &Corpus, create: SessionEvent, snapshot_every: u64) -> Result<Self, StoreError> {
        let state = SessionState::create(corpus, &create)?;
        let id = dir.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        fs::create_dir(dir).map_err(|e| match e.kind() {
            std::io::ErrorKind::AlreadyExists => StoreError::MatrixExists(id),
            _ => StoreError::File { path: dir.to_path_buf(), source: e },
        })?;
        let path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new().create_new(true).append(true).open(&path).map_err(file_err(&path))?;
        write_event(&mut log, &path, &create)?;
        Ok(DurableSession { state, dir: dir.to_path_buf(), log, snapshot_every, create })
    }

    /// Rebuilds the session from disk, dropping a torn final line.
    pub fn open(dir: &Path, corpus: &Corpus, snapshot_every: u64) -> Result<Self, StoreError> {
        let path = dir.join(LOG_FILE);
        let (events, valid_len) = read_log(&path)?;
        let log = OpenOptions::new().append(true).open(&path).map_err(file_err(&path))?;
        if log.metadata().map_err(file_err(&path))?.len() != valid_len {
            log.set_len(valid_len).map_err(file_err(&path))?;
            log.sync_all().map_err(file_err(&path))?;
        }
        let create = events.first().cloned().ok_or_else(|| StoreError::EmptyLog(path.clone()))?;
        let state = match read_snapshot(dir).filter(|s| s.create == create) {
            Some(snap) if snap.state.last_seq <= events.len() as u64 => {
                let skip = snap.state.last_seq as usize;
                match SessionState::restore(corpus, &create, snap.state) {
                    Ok(mut st) => {
                        for e in &events[skip..] {
                            st.apply(e)?;
                        }
                        st
                    }
                    Err(_) => SessionState::replay(corpus, &events)?,
                }
            }
            _ => SessionState::replay(corpus, &events)?,
        };
        Ok(DurableSession { state, dir: dir.to_path_buf(), log, snapshot_every, create })
    }

    pub fn last_seq(&self) -> u64 {
        self.state.last_seq
    }

    pub fn create_event(&self) -> &SessionEvent {
        &self.create
    }

    /// Validates, durably appends, then applies the next event.
    pub fn commit(&mut self, payload: EventPayload, timestamp: String) -> Result<SessionEvent, StoreError> {
        let event = SessionEvent { seq: self.state.last_seq + 1, timestamp, payload };
        self.state.validate(&event)?;
        let path = self.dir.join(LOG_FILE);
        write_event(&mut self.log, &path, &event)?;
        self.state.apply(&event)?;
        if self.snapshot_every > 0 && event.seq.is_multiple_of(self.snapshot_every) {
            // a failed snapshot only costs replay time later
            let _ = self.write_snapshot();
        }
        Ok(event)
    }

    pub fn write_snapshot(&self) -> Result<(), StoreError> {
        let snap = StoredSnapshot { create: self.create.clone(), state: self.state.snapshot() };
        let tmp = self.dir.join("snapshot.json.tmp");
        let text = serde_json::to_vec(&snap).expect("snapshot serializes");
        let mut f = File::create(&tmp).map_err(file_err(&tmp))?;
        f.write_all(&text).and_then(|_| f.sync_all()).map_err(file_err(&tmp))?;
        let dest = self.dir.join(SNAPSHOT_FILE);
        fs::rename(&tmp, &dest).map_err(file_err(&dest))
    }

    pub fn events(&self) -> Result<Vec<SessionEvent>, StoreError> {
        Ok(read_log(&self.dir.join(LOG_FILE))?.0)
    }
}

fn write_event(log: &mut File, path: &Path, e: &SessionEvent) -> Result<(), StoreError> {
    let mut line = serde_json::to_vec(e).expect("events serialize");
    line.push(b'\n');
    log.write_all(&line).and_then(|_| log.sync_data()).map_err(file_err(path))
}

fn read_snapshot(dir: &Path) -> Option<StoredSnapshot> {
    let text = fs::read(dir.join(SNAPSHOT_FILE)).ok()?;
    serde_json::from_slice(&text).ok()
}

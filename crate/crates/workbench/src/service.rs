//! JSON-over-HTTP API.
//!
//! Each matrix is guarded by its own lock: mutations hold it exclusively, so
//! the event log of a matrix is a total order; reads share it.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evmatrix_core::keywords::{
    highlight_spans, top_frequent, top_relevant, KeywordError, TermSummary, DEFAULT_HIGHLIGHT_TERMS, DEFAULT_LAMBDA,
};
use evmatrix_core::matrix::Layer;
use evmatrix_core::projection::{project_with_queries, DEFAULT_SEED};
use evmatrix_core::session::{EventPayload, Scope, SessionError};
use evmatrix_core::{
    Corpus, Document, Label, MatrixError, Method, Projection, RelevanceError, RocchioParams,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

use crate::store::{DataDir, DurableSession, StoreError, DEFAULT_SNAPSHOT_EVERY};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub max_vocab: usize,
    pub params: RocchioParams,
    pub snapshot_every: u64,
    /// Directory of prebuilt frontend assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            max_vocab: evmatrix_core::text::DEFAULT_MAX_VOCAB,
            params: RocchioParams::default(),
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            static_dir: None,
        }
    }
}

struct MatrixEntry {
    corpus_id: String,
    corpus: Arc<Corpus>,
    session: RwLock<DurableSession>,
    projections: Mutex<HashMap<(Method, u64), Value>>,
}

pub struct AppState {
    config: ServiceConfig,
    data: DataDir,
    corpora: BTreeMap<String, Arc<Corpus>>,
    matrices: RwLock<BTreeMap<String, Arc<MatrixEntry>>>,
}

impl AppState {
    /// Loads every corpus and replays every matrix log under the data dir.
    pub fn load(config: ServiceConfig) -> Result<Self, StoreError> {
        let data = DataDir::open(&config.data_dir)?;
        let mut corpora = BTreeMap::new();
        for id in data.corpus_ids()? {
            let c = data.load_corpus(&id)?;
            tracing::info!(corpus = %id, documents = c.len(), "loaded corpus");
            corpora.insert(id, Arc::new(c));
        }
        let mut matrices = BTreeMap::new();
        for id in data.matrix_ids()? {
            let create = data.matrix_create_event(&id)?;
            let EventPayload::CreateMatrix { corpus_id, .. } = &create.payload else {
                return Err(SessionError::MissingCreate.into());
            };
            let corpus = corpora.get(corpus_id).cloned().ok_or_else(|| StoreError::UnknownCorpus(corpus_id.clone()))?;
            let session = DurableSession::open(&data.matrix_dir(&id), &corpus, config.snapshot_every)?;
            tracing::info!(matrix = %id, last_seq = session.last_seq(), "replayed matrix");
            matrices.insert(
                id,
                Arc::new(MatrixEntry {
                    corpus_id: corpus_id.clone(),
                    corpus,
                    session: RwLock::new(session),
                    projections: Mutex::new(HashMap::new()),
                }),
            );
        }
        Ok(AppState { config, data, corpora, matrices: RwLock::new(matrices) })
    }

    async fn matrix(&self, id: &str) -> Result<Arc<MatrixEntry>, ApiError> {
        self.matrices
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown matrix `{id}`")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::SequenceGap { .. } => StatusCode::CONFLICT,
            SessionError::Matrix(MatrixError::NotInMatrix(_) | MatrixError::Corpus(_)) => StatusCode::NOT_FOUND,
            SessionError::Relevance(RelevanceError::UnknownTerm(_) | RelevanceError::InvalidParams(_))
            | SessionError::Relevance(RelevanceError::ZeroSeed)
            | SessionError::Matrix(MatrixError::SeedNotReview(_))
            | SessionError::Index(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Session(s) => s.into(),
            StoreError::UnknownMatrix(_) | StoreError::UnknownCorpus(_) => ApiError::not_found(e.to_string()),
            StoreError::MatrixExists(_) => ApiError::new(StatusCode::CONFLICT, e.to_string()),
            other => {
                tracing::error!(error = %other, "storage failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string())
            }
        }
    }
}

impl From<KeywordError> for ApiError {
    fn from(e: KeywordError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/corpora", get(list_corpora))
        .route("/corpora/{id}/stats", get(corpus_stats))
        .route("/documents/{id}", get(get_document))
        .route("/matrices", get(list_matrices).post(create_matrix))
        .route("/matrices/{id}", get(get_matrix))
        .route("/matrices/{id}/ranking", get(ranking))
        .route("/matrices/{id}/suggestions", get(suggestions))
        .route("/matrices/{id}/classify", post(classify))
        .route("/matrices/{id}/boost", post(boost))
        .route("/matrices/{id}/params", post(set_params))
        .route("/matrices/{id}/projection", get(projection))
        .route("/matrices/{id}/keywords", get(keywords).post(keywords_for_selection))
        .route("/matrices/{id}/export", get(export))
        .route("/matrices/{id}/events", get(events))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn label_counts<'a>(labels: impl Iterator<Item = &'a Label>) -> BTreeMap<Label, usize> {
    let mut counts: BTreeMap<Label, usize> =
        [Label::Relevant, Label::NonRelevant, Label::Unknown].into_iter().map(|l| (l, 0)).collect();
    for l in labels {
        *counts.entry(*l).or_default() += 1;
    }
    counts
}

async fn list_corpora(State(st): State<Arc<AppState>>) -> Json<Value> {
    let items: Vec<Value> =
        st.corpora.iter().map(|(id, c)| json!({ "corpus_id": id, "documents": c.len() })).collect();
    Json(json!({ "items": items }))
}

async fn corpus_stats(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let c = st.corpora.get(&id).ok_or_else(|| ApiError::not_found(format!("unknown corpus `{id}`")))?;
    let mut v = serde_json::to_value(c.report()).expect("report serializes");
    v["corpus_id"] = json!(id);
    Ok(Json(v))
}

#[derive(Debug, Deserialize)]
struct DocumentQuery {
    corpus: Option<String>,
    matrix: Option<String>,
    #[serde(default)]
    highlight: bool,
    top_n: Option<usize>,
}

async fn get_document(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<DocumentQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    let entry = match &q.matrix {
        Some(m) => Some(st.matrix(m).await?),
        None => None,
    };
    let (corpus_id, doc): (String, &Document) = match (&entry, &q.corpus) {
        (Some(e), _) => (e.corpus_id.clone(), e.corpus.get(&id).ok_or_else(|| unknown_doc(&id))?),
        (None, Some(c)) => {
            let corpus = st.corpora.get(c).ok_or_else(|| ApiError::not_found(format!("unknown corpus `{c}`")))?;
            (c.clone(), corpus.get(&id).ok_or_else(|| unknown_doc(&id))?)
        }
        (None, None) => st
            .corpora
            .iter()
            .find_map(|(cid, c)| c.get(&id).map(|d| (cid.clone(), d)))
            .ok_or_else(|| unknown_doc(&id))?,
    };
    let mut body = json!({ "corpus_id": corpus_id, "document": doc });
    match &entry {
        Some(e) => {
            let s = e.session.read().await;
            let state = &s.state;
            body["label"] = json!(state.matrix.label(&id));
            body["prediction"] = json!(state.predict(&id));
            if q.highlight {
                let top_n = q.top_n.unwrap_or(DEFAULT_HIGHLIGHT_TERMS);
                body["highlight"] = json!(highlight_spans(doc, &state.model, &state.index.vocabulary, top_n));
            }
        }
        None if q.highlight => return Err(ApiError::bad_request("highlight requires a `matrix` parameter")),
        None => {}
    }
    Ok(Json(body))
}

fn unknown_doc(id: &str) -> ApiError {
    ApiError::not_found(format!("unknown document `{id}`"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateMatrix {
    seed_id: String,
    corpus_id: Option<String>,
}

async fn create_matrix(
    State(st): State<Arc<AppState>>,
    body: Result<Json<CreateMatrix>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(req) = body?;
    let corpus_id = match req.corpus_id {
        Some(c) => c,
        None => match st.corpora.keys().collect::<Vec<_>>().as_slice() {
            [only] => (*only).clone(),
            [] => return Err(ApiError::bad_request("no corpus loaded")),
            _ => return Err(ApiError::bad_request("several corpora loaded; pass `corpus_id`")),
        },
    };
    let corpus = st.corpora.get(&corpus_id).cloned().ok_or_else(|| ApiError::not_found(format!("unknown corpus `{corpus_id}`")))?;
    if corpus.get(&req.seed_id).is_none() {
        return Err(unknown_doc(&req.seed_id));
    }
    // holding the map lock while creating keeps id assignment race-free
    let mut matrices = st.matrices.write().await;
    let matrix_id = st.data.next_matrix_id()?;
    let create = evmatrix_core::session::SessionEvent {
        seq: 1,
        timestamp: now(),
        payload: EventPayload::CreateMatrix {
            matrix_id: matrix_id.clone(),
            corpus_id: corpus_id.clone(),
            seed_id: req.seed_id,
            max_vocab: st.config.max_vocab,
            params: st.config.params,
        },
    };
    let session = DurableSession::create(&st.data.matrix_dir(&matrix_id), &corpus, create, st.config.snapshot_every)?;
    let summary = summary(&matrix_id, &corpus_id, &session);
    matrices.insert(
        matrix_id,
        Arc::new(MatrixEntry { corpus_id, corpus, session: RwLock::new(session), projections: Mutex::new(HashMap::new()) }),
    );
    Ok((StatusCode::CREATED, Json(summary)))
}

fn summary(matrix_id: &str, corpus_id: &str, s: &DurableSession) -> Value {
    let m = &s.state.matrix;
    json!({
        "matrix_id": matrix_id,
        "corpus_id": corpus_id,
        "seed_id": m.seed_id,
        "n_rows": m.rows.len(),
        "n_cols": m.cols.len(),
        "last_seq": s.last_seq(),
        "label_counts": label_counts(m.labels.values()),
    })
}

async fn list_matrices(State(st): State<Arc<AppState>>) -> Json<Value> {
    let entries: Vec<(String, Arc<MatrixEntry>)> =
        st.matrices.read().await.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut items = Vec::with_capacity(entries.len());
    for (id, e) in entries {
        items.push(summary(&id, &e.corpus_id, &*e.session.read().await));
    }
    Json(json!({ "items": items }))
}

async fn get_matrix(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let e = st.matrix(&id).await?;
    let s = e.session.read().await;
    let state = &s.state;
    let m = &state.matrix;
    let layers: BTreeMap<&String, Layer> = m.layers.iter().map(|(k, v)| (k, *v)).collect();
    Ok(Json(json!({
        "matrix_id": id,
        "corpus_id": e.corpus_id,
        "seed_id": m.seed_id,
        "rows": m.rows,
        "cols": m.cols,
        "cells": m.cells,
        "labels": m.labels,
        "layers": layers,
        "last_seq": s.last_seq(),
        "label_counts": label_counts(m.labels.values()),
        "empty_documents": state.index.empty_documents,
        "model": state.model.snapshot(&state.index.vocabulary),
    })))
}

#[derive(Debug, Deserialize)]
struct RankingQuery {
    scope: Option<Scope>,
}

#[derive(Debug, Serialize)]
struct RankedItem<'a> {
    doc_id: &'a str,
    score: f64,
    predicted_label: Label,
    confidence: f64,
    label: Label,
    doc_type: evmatrix_core::DocType,
    title: &'a str,
}

async fn ranking(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<RankingQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    let e = st.matrix(&id).await?;
    let s = e.session.read().await;
    let state = &s.state;
    let scope = q.scope.unwrap_or(Scope::Unknown);
    let ranked = state.ranking(scope);
    let items: Vec<RankedItem> = ranked
        .iter()
        .map(|(doc_id, score)| {
            let p = state.predict(doc_id).expect("ranked docs are in the matrix");
            let d = e.corpus.get(doc_id).expect("matrix docs are in the corpus");
            RankedItem {
                doc_id,
                score: *score,
                predicted_label: p.label,
                confidence: p.confidence,
                label: state.matrix.labels[doc_id],
                doc_type: d.doc_type,
                title: &d.title,
            }
        })
        .collect();
    Ok(Json(json!({ "scope": scope, "last_seq": s.last_seq(), "items": items })))
}

#[derive(Debug, Deserialize)]
struct SuggestQuery {
    k: Option<usize>,
}

async fn suggestions(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<SuggestQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    let e = st.matrix(&id).await?;
    let s = e.session.read().await;
    let k = q.k.unwrap_or(s.state.model.params().top_k);
    if k == 0 {
        return Err(ApiError::bad_request("k must be positive"));
    }
    let sug = s.state.suggestions(k);
    let items = |l: &[(String, f64)]| -> Vec<Value> {
        l.iter().map(|(id, score)| json!({ "doc_id": id, "score": score })).collect()
    };
    Ok(Json(json!({
        "k": k,
        "last_seq": s.last_seq(),
        "predicted_relevant": items(&sug.predicted_relevant),
        "predicted_non_relevant": items(&sug.predicted_non_relevant),
    })))
}

/// Runs a mutation under the matrix's write lock, checking the optional
/// sequence precondition first.
async fn mutate(
    st: &AppState,
    id: &str,
    expected_seq: Option<u64>,
    payload: EventPayload,
) -> ApiResult<(evmatrix_core::session::SessionEvent, Arc<MatrixEntry>)> {
    let e = st.matrix(id).await?;
    let mut s = e.session.write().await;
    if let Some(expected) = expected_seq {
        if expected != s.last_seq() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                format!("stale expected_seq {expected}; matrix is at seq {}", s.last_seq()),
            ));
        }
    }
    let event = s.commit(payload, now())?;
    drop(s);
    e.projections.lock().expect("cache lock").clear();
    Ok((event, e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyBody {
    doc_id: String,
    label: Label,
    expected_seq: Option<u64>,
}

async fn classify(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<ClassifyBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(b) = body?;
    let (event, _) = mutate(&st, &id, b.expected_seq, EventPayload::Classify { doc_id: b.doc_id.clone(), label: b.label }).await?;
    Ok(Json(json!({ "seq": event.seq, "doc_id": b.doc_id, "label": b.label })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoostBody {
    term: String,
    delta_steps: i32,
    expected_seq: Option<u64>,
}

async fn boost(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<BoostBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(b) = body?;
    let payload = EventPayload::Boost { term: b.term.clone(), delta_steps: b.delta_steps };
    let (event, e) = mutate(&st, &id, b.expected_seq, payload).await?;
    let s = e.session.read().await;
    let i = s.state.index.vocabulary.index_of(&b.term).expect("term validated on commit");
    Ok(Json(json!({ "seq": event.seq, "term": b.term, "boost": s.state.model.boosts()[i] })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsBody {
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    top_k: Option<usize>,
    expected_seq: Option<u64>,
}

async fn set_params(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<ParamsBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(b) = body?;
    let e = st.matrix(&id).await?;
    let current = *e.session.read().await.state.model.params();
    let params = RocchioParams {
        alpha: b.alpha.unwrap_or(current.alpha),
        beta: b.beta.unwrap_or(current.beta),
        gamma: b.gamma.unwrap_or(current.gamma),
        delta: b.delta.unwrap_or(current.delta),
        top_k: b.top_k.unwrap_or(current.top_k),
    };
    // the precondition is checked again under the write lock
    let (event, _) = mutate(&st, &id, b.expected_seq, EventPayload::SetParams { params }).await?;
    Ok(Json(json!({ "seq": event.seq, "params": params })))
}

#[derive(Debug, Deserialize)]
struct ProjectionQuery {
    method: Option<String>,
}

#[derive(Debug, Serialize)]
struct ProjectionBody {
    #[serde(flatten)]
    projection: Projection,
    /// Positions of the relevant and non-relevant query vectors, where the
    /// method supports placing new points.
    centroids: BTreeMap<Label, Option<[f64; 2]>>,
}

async fn projection(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<ProjectionQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    let method: Method = q.method.as_deref().unwrap_or("pca").parse().map_err(|e: evmatrix_core::ProjectionError| ApiError::bad_request(e.to_string()))?;
    let e = st.matrix(&id).await?;
    let s = e.session.read().await;
    let key = (method, s.last_seq());
    if let Some(v) = e.projections.lock().expect("cache lock").get(&key) {
        return Ok(Json(v.clone()));
    }
    let state = &s.state;
    let vectors: Vec<evmatrix_core::DocumentVector> = state.index.vectors.clone();
    let labels = state.matrix.labels.clone();
    let dim = state.index.vocabulary.len();
    let queries = [state.model.weighted_relevant(), state.model.weighted_non_relevant()];
    drop(s);
    let computed = tokio::task::spawn_blocking(move || {
        let refs: Vec<&evmatrix_core::DocumentVector> = vectors.iter().collect();
        let qs: Vec<&[f64]> = queries.iter().map(Vec::as_slice).collect();
        project_with_queries(&refs, dim, &labels, method, DEFAULT_SEED, &qs)
    })
    .await
    .map_err(|err| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string()))?;
    let (projection, placed) = computed.map_err(|err| ApiError::bad_request(err.to_string()))?;
    let body = ProjectionBody {
        projection,
        centroids: [(Label::Relevant, placed[0]), (Label::NonRelevant, placed[1])].into_iter().collect(),
    };
    let v = serde_json::to_value(&body).expect("projection serializes");
    e.projections.lock().expect("cache lock").insert(key, v.clone());
    Ok(Json(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KeywordSet {
    Relevant,
    NonRelevant,
    Unknown,
    All,
    Selection,
}

#[derive(Debug, Deserialize)]
struct KeywordQuery {
    set: Option<KeywordSet>,
    method: Option<evmatrix_core::keywords::SummaryMethod>,
    k: Option<usize>,
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionBody {
    doc_ids: Vec<String>,
}

async fn keywords(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<KeywordQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    if q.set == Some(KeywordSet::Selection) {
        return Err(ApiError::bad_request("set=selection takes its documents from a POST body"));
    }
    summarize(&st, &id, q, None).await
}

async fn keywords_for_selection(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<KeywordQuery>, QueryRejection>,
    body: Result<Json<SelectionBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = q?;
    let Json(b) = body?;
    summarize(&st, &id, q, Some(b.doc_ids)).await
}

async fn summarize(st: &AppState, id: &str, q: KeywordQuery, selection: Option<Vec<String>>) -> ApiResult<Json<Value>> {
    use evmatrix_core::keywords::SummaryMethod;
    let e = st.matrix(id).await?;
    let s = e.session.read().await;
    let m = &s.state.matrix;
    let set = q.set.unwrap_or(if selection.is_some() { KeywordSet::Selection } else { KeywordSet::Relevant });
    let ids: Vec<String> = match (set, selection) {
        (KeywordSet::Selection, Some(ids)) => {
            if let Some(bad) = ids.iter().find(|d| !m.contains(d)) {
                return Err(ApiError::not_found(format!("document `{bad}` is not in matrix `{id}`")));
            }
            ids
        }
        (KeywordSet::Selection, None) => return Err(ApiError::bad_request("selection needs `doc_ids`")),
        (KeywordSet::All, _) => m.members().cloned().collect(),
        (KeywordSet::Relevant, _) => m.ids_with_label(Label::Relevant).cloned().collect(),
        (KeywordSet::NonRelevant, _) => m.ids_with_label(Label::NonRelevant).cloned().collect(),
        (KeywordSet::Unknown, _) => m.ids_with_label(Label::Unknown).cloned().collect(),
    };
    let doc = |i: &String| e.corpus.get(i).expect("matrix docs are in the corpus");
    let group: Vec<&Document> = ids.iter().map(doc).collect();
    let k = q.k.unwrap_or(40);
    let summary: TermSummary = match q.method.unwrap_or(SummaryMethod::Frequent) {
        SummaryMethod::Frequent => top_frequent(&group, k),
        SummaryMethod::Relevance => {
            let background: Vec<&Document> = m.members().map(doc).collect();
            let lambda = q.lambda.unwrap_or(DEFAULT_LAMBDA);
            top_relevant(&group, &background, &s.state.index.vocabulary, k, lambda)?
        }
    };
    let vocab = &s.state.index.vocabulary;
    let boosts: BTreeMap<&str, f64> = summary
        .terms
        .iter()
        .filter_map(|(t, _, _)| vocab.index_of(t).map(|i| (t.as_str(), s.state.model.boosts()[i])))
        .collect();
    let mut v = serde_json::to_value(&summary).expect("summary serializes");
    v["boosts"] = json!(boosts);
    Ok(Json(v))
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(default)]
    only_relevant: bool,
    format: Option<String>,
}

async fn export(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<ExportQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let e = st.matrix(&id).await?;
    let export = e.session.read().await.state.matrix.export(q.only_relevant);
    match q.format.as_deref().unwrap_or("json") {
        "json" => Ok(Json(export).into_response()),
        "csv" => {
            let mut out = Vec::new();
            crate::io::write_matrix_csv(&mut out, &export)
                .map_err(|err| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string()))?;
            Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], out).into_response())
        }
        other => Err(ApiError::bad_request(format!("unknown export format `{other}`"))),
    }
}

async fn events(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let e = st.matrix(&id).await?;
    let items = e.session.read().await.events()?;
    Ok(Json(json!({ "items": items })))
}

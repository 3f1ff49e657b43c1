#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use evmatrix::service::{router, AppState, ServiceConfig};
use evmatrix::store::DataDir;
use evmatrix_core::synthetic::{generate_synthetic_corpus, TopicSpec};
use evmatrix_core::{Corpus, Label};
use reqwest::{Client, Response, StatusCode};
use serde_json::Value;
use tokio::task::JoinHandle;

pub struct Server {
    pub base: String,
    pub client: Client,
    pub data: PathBuf,
    task: JoinHandle<()>,
}

impl Server {
    pub async fn start(data: &Path) -> Server {
        Self::start_with(ServiceConfig::new(data)).await
    }

    pub async fn start_with(config: ServiceConfig) -> Server {
        let data = config.data_dir.clone();
        let state = Arc::new(AppState::load(config).expect("data dir loads"));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let task = tokio::spawn(async move {
            axum::serve(listener, router(state)).await.unwrap();
        });
        // no pooled connections, so a stopped server is really gone
        let client = Client::builder().pool_max_idle_per_host(0).build().unwrap();
        Server { base, client, data, task }
    }

    pub async fn stop(self) -> PathBuf {
        self.task.abort();
        let _ = self.task.await;
        self.data
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn get(&self, path: &str) -> Response {
        self.client.get(self.url(path)).send().await.unwrap()
    }

    pub async fn post(&self, path: &str, body: Value) -> Response {
        self.client.post(self.url(path)).json(&body).send().await.unwrap()
    }

    pub async fn get_json(&self, path: &str) -> Value {
        expect_json(self.get(path).await, StatusCode::OK).await
    }

    pub async fn post_json(&self, path: &str, body: Value) -> Value {
        expect_json(self.post(path, body).await, StatusCode::OK).await
    }
}

pub async fn expect_json(r: Response, status: StatusCode) -> Value {
    let got = r.status();
    let text = r.text().await.unwrap();
    assert_eq!(got, status, "body: {text}");
    serde_json::from_str(&text).unwrap()
}

pub struct Fixture {
    pub seed_id: String,
    pub truth: std::collections::BTreeMap<String, Label>,
}

/// Stores a seeded synthetic corpus as `synth` under `data`.
pub fn synthetic_data_dir(data: &Path, n_docs: usize, n_relevant: usize, seed: u64) -> Fixture {
    let s = generate_synthetic_corpus(n_docs, n_relevant, &TopicSpec::default(), seed).unwrap();
    let corpus = Corpus::from_documents(s.documents);
    DataDir::open(data).unwrap().save_corpus("synth", &corpus).unwrap();
    Fixture { seed_id: s.seed_id.unwrap(), truth: s.truth }
}

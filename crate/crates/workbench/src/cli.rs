//! Command-line entry points.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use evmatrix_core::session::{EventPayload, SessionEvent};
use evmatrix_core::simulate::{simulate_curation, SimulationConfig};
use evmatrix_core::synthetic::{generate_synthetic_corpus, TopicSpec, DEFAULT_FIXTURE_SEED};
use evmatrix_core::text::DEFAULT_MAX_VOCAB;
use evmatrix_core::{build_initial_matrix, MatrixExport, RocchioParams};

use crate::io::{load_corpus, load_truth, write_corpus, write_json, write_matrix_csv};
use crate::service::{AppState, ServiceConfig};
use crate::store::{DataDir, DurableSession, DEFAULT_SNAPSHOT_EVERY};

#[derive(Debug, Parser)]
#[command(name = "evmatrix", version, about = "Curate evidence matrices with relevance feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a JSON-lines corpus and store it in the data directory.
    Ingest {
        corpus: PathBuf,
        #[arg(long, env = "EVMATRIX_DATA", default_value = "data")]
        data: PathBuf,
        /// Corpus id; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
    },
    /// Build the initial matrix for a seed review.
    ///
    /// With a corpus file the matrix is written out and nothing is stored.
    /// With a data directory a curation session is created in it.
    BuildMatrix {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: String,
        /// Corpus id inside a data directory, when it holds several.
        #[arg(long)]
        corpus_id: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_MAX_VOCAB)]
        max_vocab: usize,
    },
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Replay curation with a perfect reviewer and report recall.
    Simulate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: String,
        /// JSON object mapping document ids to `relevant` or `non_relevant`.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_VOCAB)]
        max_vocab: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the current state of a stored matrix.
    Export {
        #[arg(long)]
        matrix: String,
        #[arg(long, env = "EVMATRIX_DATA", default_value = "data")]
        data: PathBuf,
        #[arg(long)]
        only_relevant: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic corpus and its truth labels.
    Generate {
        #[arg(long, default_value_t = 300)]
        docs: usize,
        #[arg(long, default_value_t = 60)]
        relevant: usize,
        #[arg(long, default_value_t = DEFAULT_FIXTURE_SEED)]
        seed: u64,
        /// Output directory for `corpus.jsonl` and `truth.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "EVMATRIX_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "EVMATRIX_HOST", default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, env = "EVMATRIX_DATA", default_value = "data")]
    pub data: PathBuf,
    /// Directory of frontend assets served at `/`.
    #[arg(long = "static", env = "EVMATRIX_STATIC")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, env = "EVMATRIX_MAX_VOCAB", default_value_t = DEFAULT_MAX_VOCAB)]
    pub max_vocab: usize,
    #[arg(long, env = "EVMATRIX_SNAPSHOT_EVERY", default_value_t = DEFAULT_SNAPSHOT_EVERY)]
    pub snapshot_every: u64,
    #[arg(long, env = "EVMATRIX_ALPHA", default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, env = "EVMATRIX_BETA", default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, env = "EVMATRIX_GAMMA", default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, env = "EVMATRIX_DELTA", default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, env = "EVMATRIX_TOP_K", default_value_t = 10)]
    pub top_k: usize,
}

impl ServeArgs {
    pub fn config(&self) -> Result<ServiceConfig> {
        let params =
            RocchioParams { alpha: self.alpha, beta: self.beta, gamma: self.gamma, delta: self.delta, top_k: self.top_k };
        params.validate()?;
        Ok(ServiceConfig {
            data_dir: self.data.clone(),
            max_vocab: self.max_vocab,
            params,
            snapshot_every: self.snapshot_every,
            static_dir: self.static_dir.clone(),
        })
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, data, id } => ingest(&corpus, &data, id),
        Command::BuildMatrix { corpus, seed, corpus_id, out, format, max_vocab } => {
            build_matrix(&corpus, &seed, corpus_id, out.as_deref(), format, max_vocab)
        }
        Command::Serve(args) => serve(args),
        Command::Simulate { corpus, seed, truth, k, rounds, max_vocab, out } => {
            let corpus = load_corpus(&corpus)?;
            let truth = load_truth(&truth)?;
            let config = SimulationConfig { k, max_rounds: rounds, max_vocab, ..Default::default() };
            let report = simulate_curation(&corpus, &seed, &truth, &config)?;
            emit_json(out.as_deref(), &report)
        }
        Command::Export { matrix, data, only_relevant, format, out } => {
            let data = DataDir::open(data)?;
            let create = data.matrix_create_event(&matrix)?;
            let corpus = data.load_corpus(create_corpus_id(&create)?)?;
            let session = DurableSession::open(&data.matrix_dir(&matrix), &corpus, DEFAULT_SNAPSHOT_EVERY)?;
            emit_export(out.as_deref(), format, &session.state.matrix.export(only_relevant))
        }
        Command::Generate { docs, relevant, seed, out } => {
            let s = generate_synthetic_corpus(docs, relevant, &TopicSpec::default(), seed)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_corpus(&out.join("corpus.jsonl"), &s.documents)?;
            write_json(&out.join("truth.json"), &s.truth)?;
            if let Some(id) = s.seed_id {
                println!("{id}");
            }
            Ok(())
        }
    }
}

fn create_corpus_id(create: &SessionEvent) -> Result<&str> {
    match &create.payload {
        EventPayload::CreateMatrix { corpus_id, .. } => Ok(corpus_id),
        other => bail!("matrix log starts with `{}` instead of create_matrix", other.kind()),
    }
}

fn ingest(path: &Path, data: &Path, id: Option<String>) -> Result<()> {
    let corpus = load_corpus(path)?;
    let id = match id {
        Some(id) => id,
        None => path.file_stem().and_then(|s| s.to_str()).context("corpus path has no usable file stem")?.to_string(),
    };
    let stored = DataDir::open(data)?.save_corpus(&id, &corpus)?;
    let mut report = serde_json::to_value(corpus.report())?;
    report["corpus_id"] = id.into();
    report["path"] = stored.display().to_string().into();
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn build_matrix(
    corpus: &Path,
    seed: &str,
    corpus_id: Option<String>,
    out: Option<&Path>,
    format: Format,
    max_vocab: usize,
) -> Result<()> {
    if !corpus.is_dir() {
        let c = load_corpus(corpus)?;
        let m = build_initial_matrix(&c, seed, "m0")?;
        return emit_export(out, format, &m.export(false));
    }
    let data = DataDir::open(corpus)?;
    let corpus_id = match corpus_id {
        Some(id) => id,
        None => match data.corpus_ids()?.as_slice() {
            [only] => only.clone(),
            [] => bail!("no corpus stored under {}; run `evmatrix ingest` first", corpus.display()),
            _ => bail!("several corpora under {}; pass --corpus-id", corpus.display()),
        },
    };
    let c = data.load_corpus(&corpus_id)?;
    let matrix_id = data.next_matrix_id()?;
    let create = SessionEvent {
        seq: 1,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        payload: EventPayload::CreateMatrix {
            matrix_id: matrix_id.clone(),
            corpus_id,
            seed_id: seed.into(),
            max_vocab,
            params: RocchioParams::default(),
        },
    };
    let session = DurableSession::create(&data.matrix_dir(&matrix_id), &c, create, DEFAULT_SNAPSHOT_EVERY)?;
    eprintln!("created matrix {matrix_id}");
    emit_export(out, format, &session.state.matrix.export(false))
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn emit_export(out: Option<&Path>, format: Format, export: &MatrixExport) -> Result<()> {
    match format {
        Format::Json => emit_json(out, export),
        Format::Csv => {
            match out {
                Some(p) => {
                    let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                    write_matrix_csv(f, export)?;
                }
                None => write_matrix_csv(std::io::stdout().lock(), export)?,
            }
            Ok(())
        }
    }
}

fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info,tower_http=warn".into()),
        )
        .init();
    let config = args.config()?;
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let state = Arc::new(AppState::load(config)?);
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, crate::service::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}


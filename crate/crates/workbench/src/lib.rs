//! Files, persistence, HTTP API and command line for evidence-matrix curation.

pub mod cli;
pub mod io;
pub mod service;
pub mod store;

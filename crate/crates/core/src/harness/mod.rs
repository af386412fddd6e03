//! Generators, seeded experiments, records and bound checks.

mod experiment;
mod generate;
mod records;
mod verify;

pub use experiment::{
    run_experiment, run_trial, searcher_bound, CertifiedGame, ExperimentConfig, OracleSpec, SearcherKind, TrialBound,
};
pub use generate::{generate, parse_kind, sample_distinct, GeneratorSpec, GraphKind};
pub use records::{
    join_counts, join_vertices, parse_records, render, summarize, to_csv, to_json, ExperimentRecord, OutputFormat,
    Summary, CSV_COLUMNS,
};
pub use verify::{verify_bounds, BoundSpec, VerifyReport, VerifySpec};

use crate::adversaries::AdversaryError;
use crate::graph::GraphError;
use crate::oracles::OracleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown {what} `{name}`")]
    UnknownName { what: &'static str, name: String },
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),
    #[error("incompatible configuration: {0}")]
    IncompatibleConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(String),
}

//! Tabular schema handling: row encoding, CSV ingestion/emission, synthetic
//! population generation, and member/holdout partitioning.

mod csvio;
mod encode;
mod generate;
mod schema;
mod splits;

pub use csvio::{format_cell, parse_cell, read_rows_csv, read_schema_json, write_rows_csv, write_schema_json};
pub use encode::{decode, encode, fit_encoder, EncodedRecord, EncoderStats, NumericalStats};
pub use generate::{generate_synthetic_population, GeneratorConfig, MixtureComponent};
pub use schema::{CellValue, ColumnKind, ColumnSpec, Row, TableSchema};
pub use splits::{make_splits, SplitManifest};

use thiserror::Error;

/// Identifier of a row within a population (its 0-based position).
pub type RowId = u64;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("column '{column}': unknown category '{value}'")]
    UnknownCategory { column: String, value: String },
    #[error("column '{column}': zero variance, cannot standardize")]
    ZeroVariance { column: String },
    #[error("column '{column}': non-finite numerical value")]
    NonFinite { column: String },
    #[error("row length mismatch: expected {expected}, got {got}")]
    RowLength { expected: usize, got: usize },
    #[error("encoded vector length mismatch: expected {expected}, got {got}")]
    VectorLength { expected: usize, got: usize },
    #[error("need at least {needed} rows, have {available}")]
    InsufficientPopulation { needed: usize, available: usize },
    #[error("too few rows: {0}")]
    TooFewRows(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TabularError>;

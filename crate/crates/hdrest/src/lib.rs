//! Highest density region estimation from the command line: point samples,
//! weekly case data and the simulation benchmark.

pub mod export;
pub mod geojson;
pub mod ingest;
pub mod pipeline;
pub mod report;

use hdrest_core::hdr::HdrError;
use hdrest_core::simbench::SimError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Hdr(#[from] HdrError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AppError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

//! MVTec-style dataset ingestion, the parity split of the normal training
//! images, and generation of simulated anomaly benchmarks.

mod generate;
mod ingest;
mod split;

pub use generate::{
    augment_for_training, generate_simulated_dataset, regenerate_sample, sample_seed,
    AnomalySample, CategorySummary, Manifest, ManifestEntry, SampleParams, SimulationPlan,
    SkipNote, MAX_DEGENERATE_RETRIES,
};
pub use ingest::{ingest_mvtec, AnomalousEntry, DatasetIndex};
pub use split::{split_parity, split_parity_paths, SplitPlan};

use std::path::PathBuf;

use thiserror::Error;

use crate::augment::{AugmentError, Category};
use crate::imgcore::ImageError;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset layout error at {path}: {reason}")]
    Layout { path: PathBuf, reason: String },
    #[error("anomalous image has no ground-truth mask: {0}")]
    MissingMask(PathBuf),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("no anomaly-free test images to simulate from")]
    EmptyTestSet,
    #[error("category '{0}' cannot be generated as a benchmark category")]
    InvalidCategory(Category),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to build worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DatasetError {
    let path = path.into();
    move |source| DatasetError::Io { path, source }
}

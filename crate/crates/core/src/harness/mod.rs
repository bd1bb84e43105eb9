//! Twin-experiment driver: truth generation, synthetic observations,
//! replicate execution, RMSE statistics, and CSV reports.

mod config;
mod experiment;
mod report;
mod stats;

use thiserror::Error;

use crate::filters::FilterError;
use crate::models::ModelError;

pub use config::{ExperimentConfig, FilterKind};
pub use experiment::{
    generate_truth, observation_operator, replicate_seed, run_experiment, run_filter, run_replicate,
    synthesize_observations, table_configs, worker_count, FilterRun, ReplicateResult, RunSummary, WORKERS_ENV,
};
pub use report::{
    write_cycles_csv, write_replicates_csv, write_summary_csv, write_trajectory_csv, REPLICATE_HEADER,
    SUMMARY_HEADER,
};
pub use stats::{rmse, sig6, summarize, Summary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cannot summarize an empty sample")]
    EmptySample,
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

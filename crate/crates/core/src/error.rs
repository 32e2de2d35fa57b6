use thiserror::Error;

use crate::dataset::DatasetError;
use crate::evaluation::EvalError;
use crate::experiment::ExperimentError;
use crate::logistic::FitError;
use crate::retrieval::RetrievalError;
use crate::weighting::WeightError;

/// Crate-wide error; every message is prefixed with the module that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("logistic: {0}")]
    Fit(#[from] FitError),
    #[error("weighting: {0}")]
    Weight(#[from] WeightError),
    #[error("retrieval: {0}")]
    Retrieval(#[from] RetrievalError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("experiment: {0}")]
    Experiment(#[from] ExperimentError),
}

impl Error {
    /// Short module tag, used for machine-readable diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Dataset(_) => "dataset",
            Error::Fit(_) => "logistic",
            Error::Weight(_) => "weighting",
            Error::Retrieval(_) => "retrieval",
            Error::Eval(_) => "evaluation",
            Error::Experiment(_) => "experiment",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

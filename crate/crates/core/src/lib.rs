//! Case-based reasoning with a soft K-nearest-neighbour engine whose attribute
//! and case weights come from a fitted logistic regression.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`dataset`] loads or generates a binary case base and splits it into
//!    training, setting and evaluation parts.
//! 2. [`logistic`] fits a maximum-likelihood logistic model on the training
//!    part (optionally with AIC stepwise selection).
//! 3. [`weighting`] turns Wald statistics into attribute weights and Pearson
//!    residuals into case weights.
//! 4. [`retrieval`] scores queries by inverse-distance fusion over the K
//!    nearest labeled cases, with K tuned on the setting part.
//! 5. [`evaluation`] measures AUC with bootstrap percentile intervals, and
//!    [`experiment`] runs the full scenario matrix and writes reports.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod logistic;
pub mod retrieval;
pub mod rng;
pub mod weighting;

mod stats;

pub use error::{Error, Result};

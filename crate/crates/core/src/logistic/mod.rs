//! Maximum-likelihood logistic regression on binary attributes.
//!
//! Fitting is Newton-Raphson on the score equations (IRLS) with step
//! halving; standard errors come from the inverse observed information at
//! the optimum. The fitted model exposes the two quantities the retrieval
//! weights are built from: Wald statistics and Pearson residuals.

mod irls;
mod stepwise;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSchema, Case, CaseBase};
use crate::stats::sigmoid;

pub use irls::fit;
pub use stepwise::{stepwise_select, StepAction, StepRecord, StepwiseResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    Empty,
    #[error("case `{0}` is unlabeled")]
    Unlabeled(String),
    #[error("every training label is {}", u8::from(*.0))]
    SingleClass(bool),
    #[error("constant attribute(s) {}: standard error undefined", .0.join(", "))]
    ConstantAttribute(Vec<String>),
    #[error("separation on attribute(s) {}: maximum likelihood estimate does not exist", .0.join(", "))]
    Separation(Vec<String>),
    #[error("information matrix is singular")]
    SingularInformation,
    #[error("model did not converge")]
    NotConverged,
    #[error("expected {expected} attribute values, found {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("attribute `{0}` is not present in the case base")]
    UnknownAttribute(String),
}

/// Numerical settings for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Convergence threshold on the largest absolute coefficient change.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fitted probabilities are clamped into `[clamp, 1 - clamp]` before
    /// computing Pearson residuals.
    pub probability_clamp: f64,
    /// Largest admissible |coefficient|; beyond it the fit is declared separated.
    pub divergence_bound: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tolerance: 1e-8, max_iterations: 50, probability_clamp: 1e-6, divergence_bound: 30.0 }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(FitError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(FitError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.probability_clamp > 0.0 && self.probability_clamp < 0.5) {
            return Err(FitError::InvalidConfig("probability_clamp must lie in (0, 0.5)".into()));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return Err(FitError::InvalidConfig("divergence_bound must be positive".into()));
        }
        Ok(())
    }
}

/// A fitted logistic model over a subset of the schema attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub selected_attributes: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub std_errors: Vec<f64>,
    pub intercept_std_error: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_cases: usize,
    pub config: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldStatistic {
    pub attribute: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub statistic: f64,
}

impl LogisticModel {
    /// Linear predictor for values ordered like `selected_attributes`.
    pub fn linear_predictor(&self, values: &[bool]) -> Result<f64, FitError> {
        if values.len() != self.coefficients.len() {
            return Err(FitError::ValueCount { expected: self.coefficients.len(), found: values.len() });
        }
        Ok(self.intercept + values.iter().zip(&self.coefficients).filter(|(v, _)| **v).map(|(_, b)| b).sum::<f64>())
    }

    /// Predicted probability for values ordered like `selected_attributes`.
    pub fn predict_probability(&self, values: &[bool]) -> Result<f64, FitError> {
        self.linear_predictor(values).map(sigmoid)
    }

    /// Positions of the selected attributes within `schema`.
    pub fn columns_in(&self, schema: &AttributeSchema) -> Result<Vec<usize>, FitError> {
        schema.indices_of(&self.selected_attributes).map_err(FitError::UnknownAttribute)
    }

    /// Probability for a full-schema case, given [`columns_in`](Self::columns_in).
    pub fn predict_case(&self, case: &Case, columns: &[usize]) -> f64 {
        let eta = self.intercept
            + columns.iter().zip(&self.coefficients).filter(|(&j, _)| case.values[j]).map(|(_, b)| b).sum::<f64>();
        sigmoid(eta)
    }

    pub fn predict_case_base(&self, cb: &CaseBase) -> Result<Vec<f64>, FitError> {
        let columns = self.columns_in(cb.schema())?;
        Ok(cb.cases().iter().map(|c| self.predict_case(c, &columns)).collect())
    }

    /// `coefficient^2 / std_error^2` per selected attribute; intercept excluded.
    pub fn wald_statistics(&self) -> Result<Vec<WaldStatistic>, FitError> {
        if !self.converged {
            return Err(FitError::NotConverged);
        }
        Ok(self
            .selected_attributes
            .iter()
            .zip(self.coefficients.iter().zip(&self.std_errors))
            .map(|(name, (&b, &se))| WaldStatistic {
                attribute: name.clone(),
                coefficient: b,
                std_error: se,
                statistic: wald(b, se),
            })
            .collect())
    }

    /// Pearson residual `(y - p) / sqrt(p (1 - p))` per case, with `p`
    /// clamped by the model's `probability_clamp`.
    pub fn pearson_residuals(&self, labeled: &CaseBase) -> Result<Vec<f64>, FitError> {
        let columns = self.columns_in(labeled.schema())?;
        labeled
            .cases()
            .iter()
            .map(|c| {
                let y = c.label.ok_or_else(|| FitError::Unlabeled(c.id.clone()))?;
                Ok(pearson_residual(y, self.predict_case(c, &columns), self.config.probability_clamp))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn wald(coefficient: f64, std_error: f64) -> f64 {
    (coefficient * coefficient) / (std_error * std_error)
}

pub fn pearson_residual(label: bool, probability: f64, clamp: f64) -> f64 {
    let p = probability.clamp(clamp, 1.0 - clamp);
    let y = if label { 1.0 } else { 0.0 };
    (y - p) / (p * (1.0 - p)).sqrt()
}

pub fn aic(n_attributes: usize, log_likelihood: f64) -> f64 {
    2.0 * (n_attributes as f64 + 1.0) - 2.0 * log_likelihood
}

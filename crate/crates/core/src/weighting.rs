//! Attribute and case weights derived from a fitted logistic model.
//!
//! Attribute weights are Wald statistics normalized to sum to one. Case
//! weights are the standard normal density of the absolute Pearson residual;
//! they are kept unnormalized because every use of them is a ratio.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSchema, CaseBase};
use crate::logistic::WaldStatistic;
use crate::stats::normal_pdf;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("all Wald statistics are zero")]
    AllZeroWald,
    #[error("Wald statistic for `{0}` is negative or not finite")]
    InvalidWald(String),
    #[error("attribute `{0}` is not in the retrieval schema")]
    UnknownAttribute(String),
    #[error("schema has no attributes")]
    EmptySchema,
    #[error("case base has no cases")]
    EmptyCaseBase,
    #[error("residual {index} is not finite")]
    NonFiniteResidual { index: usize },
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeWeightSource {
    Wald,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseWeightSource {
    Pearson,
    Uniform,
}

impl std::fmt::Display for AttributeWeightSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttributeWeightSource::Wald => "wald",
            AttributeWeightSource::Uniform => "uniform",
        })
    }
}

impl std::fmt::Display for CaseWeightSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseWeightSource::Pearson => "pearson",
            CaseWeightSource::Uniform => "uniform",
        })
    }
}

/// One non-negative weight per retrieval-schema attribute, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeWeights {
    pub attributes: Vec<String>,
    pub weights: Vec<f64>,
    pub source: AttributeWeightSource,
}

impl AttributeWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, attribute: &str) -> Option<f64> {
        self.attributes.iter().position(|a| a == attribute).map(|i| self.weights[i])
    }

    /// Writes `attribute,weight,source` rows.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), WeightError> {
        let mut w = csv::Writer::from_writer(sink);
        let csv_err = |e: csv::Error| WeightError::Csv(e.to_string());
        w.write_record(["attribute", "weight", "source"]).map_err(csv_err)?;
        let source = self.source.to_string();
        for (a, x) in self.attributes.iter().zip(&self.weights) {
            w.write_record([a.as_str(), &x.to_string(), &source]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| WeightError::Csv(e.to_string()))
    }
}

/// Divides by the sum, then rescales once more so rounding leaves the total at one.
fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

/// `weight_a = Wald_a / sum(Wald)` over `schema`; attributes without a
/// statistic (e.g. dropped by stepwise selection) get zero.
pub fn attribute_weights_from_wald(
    wald: &[WaldStatistic],
    schema: &AttributeSchema,
) -> Result<AttributeWeights, WeightError> {
    let mut raw = vec![0.0; schema.len()];
    for w in wald {
        if !(w.statistic.is_finite() && w.statistic >= 0.0) {
            return Err(WeightError::InvalidWald(w.attribute.clone()));
        }
        let j = schema.index_of(&w.attribute).ok_or_else(|| WeightError::UnknownAttribute(w.attribute.clone()))?;
        raw[j] = w.statistic;
    }
    if !raw.iter().any(|&x| x > 0.0) {
        return Err(WeightError::AllZeroWald);
    }
    Ok(AttributeWeights {
        attributes: schema.names().map(str::to_string).collect(),
        weights: normalize(raw),
        source: AttributeWeightSource::Wald,
    })
}

pub fn uniform_attribute_weights(schema: &AttributeSchema) -> Result<AttributeWeights, WeightError> {
    let names: Vec<String> = schema.names().map(str::to_string).collect();
    uniform_attribute_weights_over(schema, &names)
}

/// Uniform over `active`, zero for every other schema attribute.
pub fn uniform_attribute_weights_over<S: AsRef<str>>(
    schema: &AttributeSchema,
    active: &[S],
) -> Result<AttributeWeights, WeightError> {
    if active.is_empty() {
        return Err(WeightError::EmptySchema);
    }
    let mut raw = vec![0.0; schema.len()];
    for a in active {
        let j = schema.index_of(a.as_ref()).ok_or_else(|| WeightError::UnknownAttribute(a.as_ref().to_string()))?;
        raw[j] = 1.0;
    }
    Ok(AttributeWeights {
        attributes: schema.names().map(str::to_string).collect(),
        weights: normalize(raw),
        source: AttributeWeightSource::Uniform,
    })
}

/// Unnormalized case weights, aligned with the labeled case base they were
/// computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseWeights {
    pub raw: Vec<f64>,
    pub source: CaseWeightSource,
}

impl CaseWeights {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Writes `case_id,raw_weight,source` rows for the cases of `labeled`.
    pub fn write_csv<W: Write>(&self, labeled: &CaseBase, sink: W) -> Result<(), WeightError> {
        let mut w = csv::Writer::from_writer(sink);
        let csv_err = |e: csv::Error| WeightError::Csv(e.to_string());
        w.write_record(["case_id", "raw_weight", "source"]).map_err(csv_err)?;
        let source = self.source.to_string();
        for (c, x) in labeled.cases().iter().zip(&self.raw) {
            w.write_record([c.id.as_str(), &x.to_string(), &source]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| WeightError::Csv(e.to_string()))
    }
}

/// `phi(|residual|)` with `phi` the standard normal density, floored at the
/// smallest positive normal float so extreme residuals keep a positive weight.
pub fn case_weights_from_residuals(residuals: &[f64]) -> Result<CaseWeights, WeightError> {
    let raw = residuals
        .iter()
        .enumerate()
        .map(|(index, &e)| {
            if e.is_finite() {
                Ok(normal_pdf(e.abs()).max(f64::MIN_POSITIVE))
            } else {
                Err(WeightError::NonFiniteResidual { index })
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(CaseWeights { raw, source: CaseWeightSource::Pearson })
}

pub fn uniform_case_weights(labeled: &CaseBase) -> Result<CaseWeights, WeightError> {
    if labeled.is_empty() {
        return Err(WeightError::EmptyCaseBase);
    }
    Ok(CaseWeights { raw: vec![1.0; labeled.len()], source: CaseWeightSource::Uniform })
}

//! Soft K-nearest-neighbour retrieval.
//!
//! Distance between two cases is the weighted Hamming disagreement
//! `sum(w_a * (v_a xor v'_a))`, so with weights summing to one it lies in
//! `[0, 1]`. A query's score is the inverse-distance fusion of its K nearest
//! labeled cases,
//!
//! ```text
//! s = sum(w_p / d_p * y_p) / sum(w_p / d_p)
//! ```
//!
//! and when some neighbours sit at distance zero the score is the limit of
//! that ratio: the case-weighted mean label of the exact matches.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Case, CaseBase};
use crate::evaluation::{auc, EvalError, ScoredSet};
use crate::weighting::{AttributeWeights, CaseWeights};

/// Metric values closer than this count as equal when picking K.
pub const METRIC_TIE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("vector has {found} attributes, weights cover {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("attribute weights do not match the case-base schema")]
    WeightSchema,
    #[error("{found} case weights for {expected} labeled cases")]
    CaseWeightCount { expected: usize, found: usize },
    #[error("k = {k} exceeds the {available} labeled cases")]
    KTooLarge { k: usize, available: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds k_max = {k_max}")]
    KAboveMax { k: usize, k_max: usize },
    #[error("labeled case `{0}` has no label")]
    Unlabeled(String),
    #[error("no neighbours to fuse")]
    NoNeighbors,
    #[error("setting set is empty")]
    EmptySetting,
    #[error("metric: {0}")]
    Metric(#[from] EvalError),
}

/// Order among neighbours at equal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    AscendingId,
}

/// Handling of neighbours at distance zero, where `1/d` is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroDistanceRule {
    /// Score only the exact matches, weighted by their case weights.
    #[default]
    ExactMatchLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub k: usize,
    pub k_max: usize,
    #[serde(default)]
    pub tie_rule: TieRule,
    #[serde(default)]
    pub zero_distance_rule: ZeroDistanceRule,
}

impl RetrievalConfig {
    pub fn new(k: usize, k_max: usize) -> Self {
        RetrievalConfig { k, k_max, tie_rule: TieRule::default(), zero_distance_rule: ZeroDistanceRule::default() }
    }

    pub fn validate(&self, n_labeled: usize) -> Result<(), RetrievalError> {
        if self.k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        if self.k > self.k_max {
            return Err(RetrievalError::KAboveMax { k: self.k, k_max: self.k_max });
        }
        if self.k_max > n_labeled {
            return Err(RetrievalError::KTooLarge { k: self.k_max, available: n_labeled });
        }
        Ok(())
    }
}

/// `min(50, 3 * floor(sqrt(n)))`, capped at `n` and at least 1.
pub fn default_k_max(n_training: usize) -> usize {
    let root = (n_training as f64).sqrt().floor() as usize;
    (3 * root).min(50).min(n_training).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub case_id: String,
    pub distance: f64,
    pub label: bool,
    pub raw_case_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub case_id: String,
    pub score: f64,
    pub neighbors: Vec<Neighbor>,
    /// Every neighbour disagrees on all weighted attributes (distance 1).
    pub out_of_coverage: bool,
}

/// Weighted Hamming disagreement.
pub fn distance(p: &[bool], q: &[bool], w: &AttributeWeights) -> Result<f64, RetrievalError> {
    for v in [p, q] {
        if v.len() != w.len() {
            return Err(RetrievalError::SchemaMismatch { expected: w.len(), found: v.len() });
        }
    }
    Ok(p.iter().zip(q).zip(&w.weights).filter(|((a, b), _)| a != b).map(|(_, w)| w).sum())
}

/// Running sums of the fusion ratio, fed neighbours in rank order.
#[derive(Debug, Clone, Copy, Default)]
struct Fusion {
    exact: usize,
    exact_num: f64,
    exact_den: f64,
    num: f64,
    den: f64,
}

impl Fusion {
    fn push(&mut self, distance: f64, label: bool, weight: f64) {
        if distance == 0.0 {
            self.exact += 1;
            self.exact_den += weight;
            if label {
                self.exact_num += weight;
            }
        } else {
            let c = weight / distance;
            self.den += c;
            if label {
                self.num += c;
            }
        }
    }

    fn score(&self) -> f64 {
        if self.exact > 0 {
            self.exact_num / self.exact_den
        } else {
            self.num / self.den
        }
    }
}

/// Inverse-distance, case-weighted mean label of `neighbors`.
pub fn fuse(neighbors: &[Neighbor], rule: ZeroDistanceRule) -> Result<f64, RetrievalError> {
    if neighbors.is_empty() {
        return Err(RetrievalError::NoNeighbors);
    }
    match rule {
        ZeroDistanceRule::ExactMatchLimit => {
            let mut f = Fusion::default();
            for n in neighbors {
                f.push(n.distance, n.label, n.raw_case_weight);
            }
            Ok(f.score())
        }
    }
}

/// A labeled case base prepared for repeated queries.
pub struct Retriever<'a> {
    labeled: &'a CaseBase,
    labels: Vec<bool>,
    case_weights: &'a [f64],
    /// Attributes with a nonzero weight, as `(column, weight)`.
    active: Vec<(usize, f64)>,
    n_attributes: usize,
}

impl<'a> Retriever<'a> {
    pub fn new(
        labeled: &'a CaseBase,
        attribute_weights: &AttributeWeights,
        case_weights: &'a CaseWeights,
    ) -> Result<Self, RetrievalError> {
        if !labeled.schema().names().eq(attribute_weights.attributes.iter().map(String::as_str)) {
            return Err(RetrievalError::WeightSchema);
        }
        if case_weights.len() != labeled.len() {
            return Err(RetrievalError::CaseWeightCount { expected: labeled.len(), found: case_weights.len() });
        }
        let labels = labeled
            .cases()
            .iter()
            .map(|c| c.label.ok_or_else(|| RetrievalError::Unlabeled(c.id.clone())))
            .collect::<Result<_, _>>()?;
        let active =
            attribute_weights.weights.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(j, &w)| (j, w)).collect();
        Ok(Retriever {
            labeled,
            labels,
            case_weights: &case_weights.raw,
            active,
            n_attributes: attribute_weights.len(),
        })
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.len()
    }

    fn distance_to(&self, query: &[bool], case: &Case) -> f64 {
        // zero-weight terms add nothing, so skipping them leaves the sum unchanged
        self.active.iter().filter(|&&(j, _)| query[j] != case.values[j]).map(|&(_, w)| w).sum()
    }

    /// Positions of the `k` nearest labeled cases with their distances,
    /// ordered by (distance, case id).
    fn ranked(&self, query: &Case, k: usize) -> Result<Vec<(usize, f64)>, RetrievalError> {
        if query.values.len() != self.n_attributes {
            return Err(RetrievalError::SchemaMismatch { expected: self.n_attributes, found: query.values.len() });
        }
        if k > self.n_labeled() {
            return Err(RetrievalError::KTooLarge { k, available: self.n_labeled() });
        }
        let cases = self.labeled.cases();
        let mut all: Vec<(usize, f64)> =
            cases.iter().enumerate().map(|(i, c)| (i, self.distance_to(&query.values, c))).collect();
        let order =
            |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then_with(|| cases[a.0].id.cmp(&cases[b.0].id));
        if k < all.len() {
            all.select_nth_unstable_by(k, order);
            all.truncate(k);
        }
        all.sort_unstable_by(order);
        Ok(all)
    }

    pub fn select_neighbors(&self, query: &Case, k: usize, tie_rule: TieRule) -> Result<Vec<Neighbor>, RetrievalError> {
        match tie_rule {
            TieRule::AscendingId => {}
        }
        Ok(self
            .ranked(query, k)?
            .into_iter()
            .map(|(i, d)| Neighbor {
                case_id: self.labeled.cases()[i].id.clone(),
                distance: d,
                label: self.labels[i],
                raw_case_weight: self.case_weights[i],
            })
            .collect())
    }

    pub fn predict(&self, query: &Case, config: &RetrievalConfig) -> Result<Prediction, RetrievalError> {
        config.validate(self.n_labeled())?;
        let neighbors = self.select_neighbors(query, config.k, config.tie_rule)?;
        let score = fuse(&neighbors, config.zero_distance_rule)?;
        let out_of_coverage = neighbors.iter().all(|n| n.distance >= 1.0 - 1e-12);
        Ok(Prediction { case_id: query.id.clone(), score, neighbors, out_of_coverage })
    }

    /// Scores for every query, in query order.
    pub fn predict_batch(
        &self,
        queries: &CaseBase,
        config: &RetrievalConfig,
    ) -> Result<Vec<Prediction>, RetrievalError> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            queries.cases().par_iter().map(|q| self.predict(q, config)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            queries.cases().iter().map(|q| self.predict(q, config)).collect()
        }
    }

    /// Score of `query` for every K in `1..=k_max`, sharing one neighbour ranking.
    fn scores_by_k(&self, query: &Case, k_max: usize) -> Result<Vec<f64>, RetrievalError> {
        let mut fusion = Fusion::default();
        Ok(self
            .ranked(query, k_max)?
            .into_iter()
            .map(|(i, d)| {
                fusion.push(d, self.labels[i], self.case_weights[i]);
                fusion.score()
            })
            .collect())
    }
}

pub fn select_neighbors(
    query: &Case,
    labeled: &CaseBase,
    attribute_weights: &AttributeWeights,
    case_weights: &CaseWeights,
    k: usize,
    tie_rule: TieRule,
) -> Result<Vec<Neighbor>, RetrievalError> {
    Retriever::new(labeled, attribute_weights, case_weights)?.select_neighbors(query, k, tie_rule)
}

pub fn predict(
    query: &Case,
    labeled: &CaseBase,
    attribute_weights: &AttributeWeights,
    case_weights: &CaseWeights,
    config: &RetrievalConfig,
) -> Result<Prediction, RetrievalError> {
    Retriever::new(labeled, attribute_weights, case_weights)?.predict(query, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTuning {
    pub k: usize,
    /// Setting-set AUC for K = 1, 2, ..., k_max.
    pub metric_by_k: Vec<f64>,
}

/// 1-based position of the first value within [`METRIC_TIE`] of the maximum.
pub fn smallest_argmax(metrics: &[f64]) -> Option<usize> {
    let best = metrics.iter().copied().max_by(f64::total_cmp)?;
    metrics.iter().position(|&m| m >= best - METRIC_TIE).map(|i| i + 1)
}

/// Picks the smallest K in `1..=k_max` maximizing setting-set AUC, with
/// `training` as the labeled case base.
pub fn tune_k(
    training: &CaseBase,
    setting: &CaseBase,
    attribute_weights: &AttributeWeights,
    case_weights: &CaseWeights,
    k_max: usize,
) -> Result<KTuning, RetrievalError> {
    if setting.is_empty() {
        return Err(RetrievalError::EmptySetting);
    }
    if k_max == 0 {
        return Err(RetrievalError::ZeroK);
    }
    let retriever = Retriever::new(training, attribute_weights, case_weights)?;
    let labels = setting
        .cases()
        .iter()
        .map(|c| c.label.ok_or_else(|| RetrievalError::Unlabeled(c.id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    // rows: setting cases, columns: K
    let table = setting.cases().iter().map(|q| retriever.scores_by_k(q, k_max)).collect::<Result<Vec<_>, _>>()?;
    let metric_by_k = (0..k_max)
        .map(|k| {
            let scores = table.iter().map(|row| row[k]).collect();
            Ok(auc(&ScoredSet::new(scores, labels.clone())?))
        })
        .collect::<Result<Vec<_>, RetrievalError>>()?;
    let k = smallest_argmax(&metric_by_k).expect("k_max >= 1");
    Ok(KTuning { k, metric_by_k })
}

//! The evaluation protocol: scenarios with and without injected random
//! attributes, full versus stepwise-selected attribute sets, and five
//! decision algorithms scored by bootstrap AUC on the evaluation part.

mod plan;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    chi_square_homogeneity, inject_random_attributes, random_split, CaseBase, HomogeneityReport, TriSplit,
};
use crate::evaluation::{bootstrap_auc, AucEstimate, ScoredSet};
use crate::logistic::{fit, stepwise_select, FitConfig, LogisticModel, StepRecord};
use crate::retrieval::{default_k_max, tune_k, RetrievalConfig, Retriever};
use crate::weighting::{
    attribute_weights_from_wald, case_weights_from_residuals, uniform_attribute_weights_over, uniform_case_weights,
    AttributeWeights, CaseWeights,
};
use crate::Error;

pub use plan::{DataSource, ExperimentPlan};
pub use report::{emit_reports, write_atomic};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("result table is empty")]
    EmptyTable,
    #[error("io: {0}")]
    Io(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("unknown attribute mode `{0}`")]
    UnknownMode(String),
}

/// The five decision algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantId {
    /// Logistic regression probabilities.
    #[serde(rename = "LR")]
    Lr,
    /// K-NN with uniform attribute and case weights.
    #[serde(rename = "CBR")]
    Cbr,
    /// K-NN with Wald attribute weights.
    #[serde(rename = "CBR+WA")]
    CbrWa,
    /// K-NN with Pearson-residual case weights.
    #[serde(rename = "CBR+WP")]
    CbrWp,
    /// K-NN with both weight families.
    #[serde(rename = "CBR+WA+WP")]
    CbrWaWp,
}

impl VariantId {
    pub const ALL: [VariantId; 5] =
        [VariantId::Lr, VariantId::Cbr, VariantId::CbrWa, VariantId::CbrWp, VariantId::CbrWaWp];

    pub fn label(self) -> &'static str {
        match self {
            VariantId::Lr => "LR",
            VariantId::Cbr => "CBR",
            VariantId::CbrWa => "CBR+WA",
            VariantId::CbrWp => "CBR+WP",
            VariantId::CbrWaWp => "CBR+WA+WP",
        }
    }

    pub fn is_knn(self) -> bool {
        self != VariantId::Lr
    }

    pub fn weights_attributes(self) -> bool {
        matches!(self, VariantId::CbrWa | VariantId::CbrWaWp)
    }

    pub fn weights_cases(self) -> bool {
        matches!(self, VariantId::CbrWp | VariantId::CbrWaWp)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VariantId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantId::ALL
            .into_iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| ExperimentError::UnknownVariant(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeMode {
    All,
    /// Attributes kept by AIC stepwise selection.
    Selected,
}

impl AttributeMode {
    pub fn label(self) -> &'static str {
        match self {
            AttributeMode::All => "all",
            AttributeMode::Selected => "selected",
        }
    }
}

impl fmt::Display for AttributeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AttributeMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(AttributeMode::All),
            "selected" => Ok(AttributeMode::Selected),
            other => Err(ExperimentError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VariantConfig {
    /// Upper bound for K tuning; `None` uses [`default_k_max`].
    pub k_max: Option<usize>,
}

/// Scores of one variant on the evaluation part.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutput {
    pub case_ids: Vec<String>,
    pub scores: ScoredSet,
    /// Tuned K; `None` for LR.
    pub k: Option<usize>,
    pub metric_by_k: Vec<f64>,
    pub attribute_weights: Option<AttributeWeights>,
    pub case_weights: Option<CaseWeights>,
}

/// Attribute and case weights a K-NN variant retrieves from `training` with.
pub fn variant_weights(
    variant: VariantId,
    training: &CaseBase,
    model: &LogisticModel,
) -> Result<(AttributeWeights, CaseWeights), Error> {
    let schema = training.schema();
    let attribute_weights = if variant.weights_attributes() {
        attribute_weights_from_wald(&model.wald_statistics()?, schema)?
    } else {
        uniform_attribute_weights_over(schema, &model.selected_attributes)?
    };
    let case_weights = if variant.weights_cases() {
        case_weights_from_residuals(&model.pearson_residuals(training)?)?
    } else {
        uniform_case_weights(training)?
    };
    Ok((attribute_weights, case_weights))
}

/// Scores the evaluation part with one variant. K-NN variants retrieve from
/// the training part and tune K on the setting part with the same weights
/// they are evaluated with.
pub fn run_variant(
    variant: VariantId,
    split: &TriSplit,
    model: &LogisticModel,
    config: &VariantConfig,
) -> Result<VariantOutput, Error> {
    let evaluation = &split.evaluation;
    let labels = evaluation.labels()?;
    let case_ids = evaluation.cases().iter().map(|c| c.id.clone()).collect();

    if !variant.is_knn() {
        let scores = model.predict_case_base(evaluation)?;
        return Ok(VariantOutput {
            case_ids,
            scores: ScoredSet::new(scores, labels)?,
            k: None,
            metric_by_k: Vec::new(),
            attribute_weights: None,
            case_weights: None,
        });
    }

    let (attribute_weights, case_weights) = variant_weights(variant, &split.training, model)?;
    let n_training = split.training.len();
    let k_max = config.k_max.unwrap_or_else(|| default_k_max(n_training)).min(n_training);
    let tuning = tune_k(&split.training, &split.setting, &attribute_weights, &case_weights, k_max)?;
    let retriever = Retriever::new(&split.training, &attribute_weights, &case_weights)?;
    let predictions = retriever.predict_batch(evaluation, &RetrievalConfig::new(tuning.k, k_max))?;
    let scores = predictions.iter().map(|p| p.score).collect();
    Ok(VariantOutput {
        case_ids,
        scores: ScoredSet::new(scores, labels)?,
        k: Some(tuning.k),
        metric_by_k: tuning.metric_by_k,
        attribute_weights: Some(attribute_weights),
        case_weights: Some(case_weights),
    })
}

/// Logistic fit for one (scenario, mode) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFit {
    pub mode: AttributeMode,
    pub model: Result<LogisticModel, String>,
    /// Wald weights over the full scenario schema (zero for dropped attributes).
    pub wald_weights: Option<AttributeWeights>,
    pub excluded: Vec<String>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    /// Number of injected random attributes.
    pub noise: usize,
    pub attributes: Vec<String>,
    pub split: TriSplit,
    pub homogeneity: HomogeneityReport,
    pub fits: Vec<ModeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub auc: AucEstimate,
    pub k: Option<usize>,
    pub attribute_weights: Option<AttributeWeights>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub noise: usize,
    pub mode: AttributeMode,
    pub variant: VariantId,
    pub outcome: Result<CellResult, String>,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub plan: ExperimentPlan,
    pub scenarios: Vec<ScenarioResult>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, noise: usize, mode: AttributeMode, variant: VariantId) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.noise == noise && r.mode == mode && r.variant == variant)
    }
}

fn fit_mode(mode: AttributeMode, split: &TriSplit, config: &FitConfig) -> ModeFit {
    let (model, excluded, steps) = match mode {
        AttributeMode::All => (fit(&split.training, config).map_err(|e| Error::from(e).to_string()), vec![], vec![]),
        AttributeMode::Selected => match stepwise_select(&split.training, config) {
            Ok(r) => (Ok(r.model), r.excluded, r.steps),
            Err(e) => (Err(Error::from(e).to_string()), vec![], vec![]),
        },
    };
    let wald_weights = model.as_ref().ok().and_then(|m| {
        let stats = m.wald_statistics().ok()?;
        attribute_weights_from_wald(&stats, split.training.schema()).ok()
    });
    ModeFit { mode, model, wald_weights, excluded, steps }
}

fn run_cell(
    variant: VariantId,
    split: &TriSplit,
    model: &LogisticModel,
    plan: &ExperimentPlan,
) -> Result<CellResult, Error> {
    let out = run_variant(variant, split, model, &VariantConfig { k_max: plan.k_max })?;
    let boot = bootstrap_auc(&out.scores, plan.replicates, plan.seed)?;
    Ok(CellResult { auc: boot.estimate, k: out.k, attribute_weights: out.attribute_weights })
}

/// Runs every (scenario, mode, variant) cell of `plan`. Each scenario uses
/// one split drawn from the master seed; a failing cell is recorded in its
/// row and the run continues.
pub fn run_matrix(plan: &ExperimentPlan) -> Result<ResultTable, Error> {
    plan.validate()?;
    let base = plan.load_case_base()?;
    let sizes = plan.split_sizes(base.len());
    let mut scenarios = Vec::with_capacity(plan.noise.len());
    let mut rows = Vec::new();

    for &noise in &plan.noise {
        let cb = inject_random_attributes(&base, noise, plan.seed)?;
        let split = random_split(&cb, sizes, plan.seed)?;
        let homogeneity = chi_square_homogeneity(&split, plan.alpha)?;
        let mut fits = Vec::with_capacity(plan.modes.len());
        for &mode in &plan.modes {
            let mode_fit = fit_mode(mode, &split, &plan.fit);
            for &variant in &plan.variants {
                let started = Instant::now();
                let outcome = match &mode_fit.model {
                    Ok(model) => run_cell(variant, &split, model, plan).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                };
                rows.push(ResultRow { noise, mode, variant, outcome, runtime: started.elapsed() });
            }
            fits.push(mode_fit);
        }
        scenarios.push(ScenarioResult {
            noise,
            attributes: cb.schema().names().map(str::to_string).collect(),
            split,
            homogeneity,
            fits,
        });
    }
    Ok(ResultTable { plan: plan.clone(), scenarios, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Case, CaseBase, SplitSizes};

    #[test]
    fn variant_labels_round_trip() {
        for v in VariantId::ALL {
            assert_eq!(v.label().parse::<VariantId>().unwrap(), v);
        }
        assert!("CBR+XX".parse::<VariantId>().is_err());
        assert_eq!(VariantId::ALL.iter().filter(|v| v.is_knn()).count(), 4);
    }

    fn split_from(train: &[(&[u8], u8)], setting: &[(&[u8], u8)], eval: &[(&[u8], u8)]) -> TriSplit {
        let schema = AttributeSchema::from_names(&["a", "b", "c"]).unwrap();
        let make = |prefix: &str, rows: &[(&[u8], u8)]| {
            CaseBase::new(
                schema.clone(),
                rows.iter()
                    .enumerate()
                    .map(|(i, (v, y))| {
                        Case::labeled(format!("{prefix}{i}"), v.iter().map(|&b| b == 1).collect(), *y == 1)
                    })
                    .collect(),
            )
            .unwrap()
        };
        TriSplit { training: make("t", train), setting: make("s", setting), evaluation: make("u", eval), seed: 0 }
    }

    fn null_model(intercept: f64) -> LogisticModel {
        LogisticModel {
            selected_attributes: vec!["a".into(), "b".into(), "c".into()],
            coefficients: vec![0.0; 3],
            intercept,
            std_errors: vec![1.0; 3],
            intercept_std_error: 1.0,
            log_likelihood: -1.0,
            aic: 10.0,
            converged: true,
            iterations: 3,
            n_cases: 8,
            config: FitConfig::default(),
        }
    }

    #[test]
    fn lr_with_null_model_is_uninformative() {
        let rows: Vec<(&[u8], u8)> = vec![(&[1, 0, 0], 1), (&[0, 1, 0], 0), (&[0, 0, 1], 1), (&[1, 1, 0], 0)];
        let split = split_from(&rows, &rows, &rows);
        let out = run_variant(VariantId::Lr, &split, &null_model(0.3), &VariantConfig::default()).unwrap();
        assert!(out.scores.scores().iter().all(|&s| s == crate::stats::sigmoid(0.3)));
        assert_eq!(crate::evaluation::auc(&out.scores), 0.5);
        assert_eq!(out.k, None);
    }

    #[test]
    fn cbr_on_duplicated_evaluation_is_perfect() {
        let train: Vec<(&[u8], u8)> = vec![
            (&[0, 0, 0], 0),
            (&[1, 0, 0], 1),
            (&[0, 1, 0], 0),
            (&[0, 0, 1], 1),
            (&[1, 1, 0], 1),
            (&[1, 0, 1], 0),
            (&[0, 1, 1], 1),
            (&[1, 1, 1], 0),
        ];
        let split = split_from(&train, &train, &train);
        let out = run_variant(VariantId::Cbr, &split, &null_model(0.0), &VariantConfig::default()).unwrap();
        assert_eq!(crate::evaluation::auc(&out.scores), 1.0);
    }

    #[test]
    fn single_cell_plan() {
        let plan = ExperimentPlan {
            data: DataSource::PaperScale,
            sizes: Some(SplitSizes::new(379, 379, 379)),
            seed: 3,
            noise: vec![0],
            modes: vec![AttributeMode::All],
            variants: vec![VariantId::CbrWaWp],
            replicates: 50,
            k_max: Some(15),
            ..ExperimentPlan::default()
        };
        let table = run_matrix(&plan).unwrap();
        assert_eq!(table.rows.len(), 1);
        let cell = table.rows[0].outcome.as_ref().unwrap();
        assert!(cell.auc.point_auc > 0.6 && cell.auc.point_auc <= 1.0);
        assert!(cell.k.unwrap() >= 1 && cell.k.unwrap() <= 15);
    }
}

use serde::{Deserialize, Serialize};

use super::irls::TrainingData;
use super::{FitConfig, FitError, LogisticModel};
use crate::dataset::CaseBase;

/// Two AICs closer than this are treated as equal.
const AIC_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Remove,
    Add,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub action: StepAction,
    pub attribute: String,
    /// AIC after the move.
    pub aic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseResult {
    pub model: LogisticModel,
    /// Attributes dropped before the search because they separate the labels.
    pub excluded: Vec<String>,
    pub steps: Vec<StepRecord>,
}

struct Candidate {
    action: StepAction,
    column: usize,
    columns: Vec<usize>,
    model: LogisticModel,
}

/// Coefficient vector (intercept first) of `model` re-indexed onto `columns`,
/// zero for newly added columns.
fn warm_start(model: &LogisticModel, current: &[usize], columns: &[usize]) -> Vec<f64> {
    let mut init = Vec::with_capacity(columns.len() + 1);
    init.push(model.intercept);
    for c in columns {
        init.push(current.iter().position(|x| x == c).map_or(0.0, |k| model.coefficients[k]));
    }
    init
}

/// Bidirectional stepwise search on AIC, starting from the full model.
///
/// Each round tries every single deletion and every single re-addition and
/// applies the lowest-AIC move if it strictly improves the current AIC; a
/// deletion that ties the current AIC is also applied. If the full model is
/// separated, the offending attributes are excluded up front and listed in
/// [`StepwiseResult::excluded`].
pub fn stepwise_select(train: &CaseBase, config: &FitConfig) -> Result<StepwiseResult, FitError> {
    config.validate()?;
    let data = TrainingData::new(train)?;
    let all: Vec<usize> = (0..data.n_columns()).collect();
    let constant = data.constant_columns(&all);
    if !constant.is_empty() {
        return Err(FitError::ConstantAttribute(constant.iter().map(|&j| data.name(j).to_string()).collect()));
    }

    let mut universe = all;
    let mut excluded = Vec::new();
    let mut current_model = loop {
        let separating = data.separating_columns(&universe);
        let attempt = if separating.is_empty() {
            data.fit(&universe, None, config)
        } else {
            Err(FitError::Separation(separating.iter().map(|&j| data.name(j).to_string()).collect()))
        };
        match attempt {
            Ok(m) => break m,
            Err(FitError::Separation(names)) => {
                let before = universe.len();
                universe.retain(|&j| !names.iter().any(|n| n == data.name(j)));
                if universe.len() == before {
                    return Err(FitError::Separation(names));
                }
                excluded.extend(names);
            }
            Err(e) => return Err(e),
        }
    };
    let mut current = universe.clone();
    let mut steps = Vec::new();
    let max_rounds = 4 * universe.len() + 4;

    for _ in 0..max_rounds {
        let mut candidates = Vec::new();
        for &column in &universe {
            let (action, columns) = if current.contains(&column) {
                (StepAction::Remove, current.iter().copied().filter(|&c| c != column).collect::<Vec<_>>())
            } else {
                let mut cols = current.clone();
                cols.push(column);
                cols.sort_unstable();
                (StepAction::Add, cols)
            };
            let init = warm_start(&current_model, &current, &columns);
            if let Ok(model) = data.fit(&columns, Some(&init), config) {
                if model.converged {
                    candidates.push(Candidate { action, column, columns, model });
                }
            }
        }
        let Some(best_aic) = candidates.iter().map(|c| c.model.aic).min_by(f64::total_cmp) else {
            break;
        };
        // among (near-)ties prefer the smaller model, then schema order
        let best = candidates
            .into_iter()
            .filter(|c| c.model.aic <= best_aic + AIC_TIE)
            .min_by_key(|c| (c.action == StepAction::Add, c.column))
            .expect("at least one candidate attains the minimum");

        let improves = best.model.aic < current_model.aic - AIC_TIE;
        let ties_smaller = best.action == StepAction::Remove && (best.model.aic - current_model.aic).abs() <= AIC_TIE;
        if !(improves || ties_smaller) {
            break;
        }
        steps.push(StepRecord {
            action: best.action,
            attribute: data.name(best.column).to_string(),
            aic: best.model.aic,
        });
        current = best.columns;
        current_model = best.model;
    }

    // final refit from a cold start on the winning subset
    let model = data.fit(&current, None, config)?;
    Ok(StepwiseResult { model, excluded, steps })
}

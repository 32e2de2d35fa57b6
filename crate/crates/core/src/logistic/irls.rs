use nalgebra::{DMatrix, DVector};

use super::{aic, FitConfig, FitError, LogisticModel};
use crate::dataset::CaseBase;
use crate::stats::sigmoid;

const MAX_HALVINGS: usize = 10;

/// Column-major view of a labeled training set.
pub(super) struct TrainingData {
    names: Vec<String>,
    columns: Vec<Vec<bool>>,
    y: DVector<f64>,
}

impl TrainingData {
    pub(super) fn new(train: &CaseBase) -> Result<Self, FitError> {
        if train.is_empty() {
            return Err(FitError::Empty);
        }
        let labels = train
            .cases()
            .iter()
            .map(|c| c.label.ok_or_else(|| FitError::Unlabeled(c.id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        if labels.iter().all(|&l| l == labels[0]) {
            return Err(FitError::SingleClass(labels[0]));
        }
        let columns = (0..train.schema().len()).map(|j| train.cases().iter().map(|c| c.values[j]).collect()).collect();
        Ok(TrainingData {
            names: train.schema().names().map(str::to_string).collect(),
            columns,
            y: DVector::from_iterator(labels.len(), labels.iter().map(|&l| if l { 1.0 } else { 0.0 })),
        })
    }

    pub(super) fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub(super) fn name(&self, column: usize) -> &str {
        &self.names[column]
    }

    fn names_of(&self, columns: &[usize]) -> Vec<String> {
        columns.iter().map(|&j| self.names[j].clone()).collect()
    }

    pub(super) fn constant_columns(&self, columns: &[usize]) -> Vec<usize> {
        columns.iter().copied().filter(|&j| self.columns[j].iter().all(|&v| v == self.columns[j][0])).collect()
    }

    /// Columns for which one level carries a single label: the likelihood
    /// then keeps increasing along that coefficient and no MLE exists.
    pub(super) fn separating_columns(&self, columns: &[usize]) -> Vec<usize> {
        columns
            .iter()
            .copied()
            .filter(|&j| {
                let mut counts = [[0usize; 2]; 2];
                for (v, y) in self.columns[j].iter().zip(self.y.iter()) {
                    counts[usize::from(*v)][usize::from(*y > 0.5)] += 1;
                }
                counts.iter().any(|level| (level[0] == 0) != (level[1] == 0))
            })
            .collect()
    }

    pub(super) fn check_columns(&self, columns: &[usize]) -> Result<(), FitError> {
        let constant = self.constant_columns(columns);
        if !constant.is_empty() {
            return Err(FitError::ConstantAttribute(self.names_of(&constant)));
        }
        let separating = self.separating_columns(columns);
        if !separating.is_empty() {
            return Err(FitError::Separation(self.names_of(&separating)));
        }
        Ok(())
    }

    fn design(&self, columns: &[usize]) -> DMatrix<f64> {
        let n = self.y.len();
        DMatrix::from_fn(n, columns.len() + 1, |i, j| match j {
            0 => 1.0,
            _ => f64::from(u8::from(self.columns[columns[j - 1]][i])),
        })
    }

    /// Newton-Raphson fit on `columns`; `init` holds the intercept followed
    /// by one coefficient per column.
    pub(super) fn fit(
        &self,
        columns: &[usize],
        init: Option<&[f64]>,
        config: &FitConfig,
    ) -> Result<LogisticModel, FitError> {
        let x = self.design(columns);
        let y = &self.y;
        let mut beta = match init {
            Some(b) => DVector::from_column_slice(b),
            None => {
                let mean = y.mean();
                let mut b = DVector::zeros(columns.len() + 1);
                b[0] = (mean / (1.0 - mean)).ln();
                b
            }
        };
        let mut ll = log_likelihood(&x, y, &beta);
        let mut converged = false;
        let mut iterations = 0;

        while iterations < config.max_iterations {
            iterations += 1;
            let (gradient, info) = score_and_information(&x, y, &beta);
            let chol = info.cholesky().ok_or(FitError::SingularInformation)?;
            let delta = chol.solve(&gradient);

            let mut step = 1.0;
            let mut candidate = &beta + &delta;
            let mut candidate_ll = log_likelihood(&x, y, &candidate);
            for _ in 0..MAX_HALVINGS {
                if candidate_ll >= ll {
                    break;
                }
                step *= 0.5;
                candidate = &beta + &delta * step;
                candidate_ll = log_likelihood(&x, y, &candidate);
            }
            let change = (&delta * step).amax();
            beta = candidate;
            ll = candidate_ll;

            if change < config.tolerance {
                converged = true;
                break;
            }
            if beta.iter().skip(1).any(|b| b.abs() > config.divergence_bound) {
                break;
            }
        }

        let diverged: Vec<usize> = (0..columns.len())
            .filter(|&k| !beta[k + 1].is_finite() || beta[k + 1].abs() > config.divergence_bound)
            .map(|k| columns[k])
            .collect();
        if !diverged.is_empty() {
            return Err(FitError::Separation(self.names_of(&diverged)));
        }
        if !beta[0].is_finite() || beta[0].abs() > config.divergence_bound {
            return Err(FitError::Separation(vec!["(intercept)".into()]));
        }

        let (_, info) = score_and_information(&x, y, &beta);
        let covariance = info.cholesky().ok_or(FitError::SingularInformation)?.inverse();
        let se: Vec<f64> = covariance.diagonal().iter().map(|v| v.sqrt()).collect();
        if se.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(FitError::SingularInformation);
        }

        Ok(LogisticModel {
            selected_attributes: self.names_of(columns),
            coefficients: beta.iter().skip(1).copied().collect(),
            intercept: beta[0],
            std_errors: se[1..].to_vec(),
            intercept_std_error: se[0],
            log_likelihood: ll,
            aic: aic(columns.len(), ll),
            converged,
            iterations,
            n_cases: y.len(),
            config: *config,
        })
    }
}

/// Bernoulli log-likelihood, evaluated without forming probabilities.
fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(&e, &yi)| yi * e - (e.max(0.0) + (-e.abs()).exp().ln_1p())).sum()
}

fn score_and_information(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let p = (x * beta).map(sigmoid);
    let gradient = x.tr_mul(&(y - &p));
    let mut weighted = x.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row *= p[i] * (1.0 - p[i]);
    }
    (gradient, weighted.tr_mul(x))
}

/// Fits every attribute of `train`.
pub fn fit(train: &CaseBase, config: &FitConfig) -> Result<LogisticModel, FitError> {
    config.validate()?;
    let data = TrainingData::new(train)?;
    let columns: Vec<usize> = (0..data.n_columns()).collect();
    data.check_columns(&columns)?;
    data.fit(&columns, None, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Case, CaseBase};

    fn case_base(rows: &[(&[u8], u8)]) -> CaseBase {
        let width = rows[0].0.len();
        let names: Vec<String> = (0..width).map(|j| format!("a{j}")).collect();
        let schema = AttributeSchema::from_names(&names).unwrap();
        let cases = rows
            .iter()
            .enumerate()
            .map(|(i, (v, y))| Case::labeled(format!("p{i:03}"), v.iter().map(|&b| b == 1).collect(), *y == 1))
            .collect();
        CaseBase::new(schema, cases).unwrap()
    }

    /// a=1: 3 of 4 positive; a=0: 1 of 4 positive.
    fn saturated() -> CaseBase {
        case_base(&[(&[1], 1), (&[1], 1), (&[1], 1), (&[1], 0), (&[0], 1), (&[0], 0), (&[0], 0), (&[0], 0)])
    }

    #[test]
    fn saturated_table_matches_empirical_logits() {
        // empirical logits: logit(1/4) = ln(1/3), logit(3/4) - logit(1/4) = ln 9
        let m = fit(&saturated(), &FitConfig::default()).unwrap();
        assert!(m.converged);
        assert!((m.intercept - (1.0f64 / 3.0).ln()).abs() < 1e-9);
        assert!((m.coefficients[0] - 9f64.ln()).abs() < 1e-9);
        assert!((m.predict_probability(&[true]).unwrap() - 0.75).abs() < 1e-12);
        // closed-form standard error for a 2x2 table: sqrt(1/3 + 1/1 + 1/1 + 1/3)
        assert!((m.std_errors[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!((m.aic - super::super::aic(1, m.log_likelihood)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_labels_give_null_model() {
        let m = fit(
            &case_base(&[
                (&[1, 0], 1),
                (&[1, 0], 0),
                (&[0, 1], 1),
                (&[0, 1], 0),
                (&[1, 1], 1),
                (&[1, 1], 0),
                (&[0, 0], 1),
                (&[0, 0], 0),
            ]),
            &FitConfig::default(),
        )
        .unwrap();
        assert!(m.intercept.abs() < 1e-10);
        assert!(m.coefficients.iter().all(|b| b.abs() < 1e-10));
    }

    #[test]
    fn complete_separation_is_reported() {
        let err = fit(
            &case_base(&[(&[1, 0], 1), (&[1, 1], 1), (&[0, 1], 0), (&[0, 0], 1), (&[0, 1], 0), (&[0, 0], 0)]),
            &FitConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, FitError::Separation(vec!["a0".into()]));
    }

    #[test]
    fn multi_attribute_separation_hits_divergence_bound() {
        // y = majority(a0, a1, a2): every single level is mixed, but the
        // plane a0 + a1 + a2 = 1.5 separates the labels.
        let rows: Vec<(&[u8], u8)> = vec![
            (&[0, 0, 0], 0),
            (&[1, 0, 0], 0),
            (&[0, 1, 0], 0),
            (&[0, 0, 1], 0),
            (&[1, 1, 0], 1),
            (&[1, 0, 1], 1),
            (&[0, 1, 1], 1),
            (&[1, 1, 1], 1),
        ];
        let cb = case_base(&rows);
        let data = TrainingData::new(&cb).unwrap();
        assert!(data.separating_columns(&[0, 1, 2]).is_empty());
        match fit(&cb, &FitConfig::default()) {
            Err(FitError::Separation(names)) => assert!(!names.is_empty()),
            other => panic!("expected separation, got {other:?}"),
        }
    }

    #[test]
    fn constant_attribute_is_rejected() {
        let err = fit(&case_base(&[(&[1, 0], 1), (&[0, 0], 0), (&[1, 0], 0), (&[0, 0], 1)]), &FitConfig::default())
            .unwrap_err();
        assert_eq!(err, FitError::ConstantAttribute(vec!["a1".into()]));
    }

    #[test]
    fn duplicated_column_is_singular() {
        let err = fit(
            &case_base(&[(&[1, 1], 1), (&[1, 1], 0), (&[0, 0], 1), (&[0, 0], 0), (&[1, 1], 1), (&[0, 0], 0)]),
            &FitConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, FitError::SingularInformation);
    }

    #[test]
    fn single_class_is_rejected() {
        assert_eq!(fit(&case_base(&[(&[1], 1), (&[0], 1)]), &FitConfig::default()), Err(FitError::SingleClass(true)));
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let cb = crate::dataset::generate_synthetic(&crate::dataset::SyntheticSpec::paper_scale(4)).unwrap();
        let data = TrainingData::new(&cb).unwrap();
        let columns: Vec<usize> = (0..data.n_columns()).collect();
        let mut previous = f64::NEG_INFINITY;
        for iterations in 1..8 {
            let config = FitConfig { max_iterations: iterations, ..FitConfig::default() };
            let m = data.fit(&columns, None, &config).unwrap();
            assert!(m.log_likelihood >= previous - 1e-9 * previous.abs().max(1.0));
            previous = m.log_likelihood;
        }
    }
}

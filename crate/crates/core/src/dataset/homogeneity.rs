use serde::Serialize;

use super::{DatasetError, TriSplit};
use crate::stats::chi_square_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Attribute,
    Label,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TestOutcome {
    Tested {
        statistic: f64,
        p_value: f64,
        flagged: bool,
    },
    /// A zero expected count met a nonzero observed count.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityRow {
    pub variable: String,
    pub kind: RowKind,
    /// One-counts in training, setting, evaluation.
    pub ones: [usize; 3],
    #[serde(flatten)]
    pub outcome: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub alpha: f64,
    pub degrees_of_freedom: usize,
    pub rows: Vec<HomogeneityRow>,
}

impl HomogeneityReport {
    pub fn attribute_rows(&self) -> impl Iterator<Item = &HomogeneityRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Attribute)
    }

    pub fn flagged_attributes(&self) -> usize {
        self.attribute_rows().filter(|r| matches!(r.outcome, TestOutcome::Tested { flagged: true, .. })).count()
    }
}

/// Pearson statistic of a parts x {0,1} table given per-part sizes and one-counts.
fn pearson_statistic(sizes: &[usize; 3], ones: &[usize; 3]) -> Option<f64> {
    let n: usize = sizes.iter().sum();
    let total_ones: usize = ones.iter().sum();
    let column_totals = [n - total_ones, total_ones];
    let mut statistic = 0.0;
    for part in 0..3 {
        let observed = [sizes[part] - ones[part], ones[part]];
        for col in 0..2 {
            let expected = sizes[part] as f64 * column_totals[col] as f64 / n as f64;
            if expected == 0.0 {
                if observed[col] != 0 {
                    return None;
                }
                continue;
            }
            let diff = observed[col] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    Some(statistic)
}

/// Chi-square test of homogeneity of every attribute (and the label) across
/// the three parts of a split: 3x2 tables, 2 degrees of freedom, no
/// continuity correction.
pub fn chi_square_homogeneity(split: &TriSplit, alpha: f64) -> Result<HomogeneityReport, DatasetError> {
    for (name, part) in split.parts() {
        if part.is_empty() {
            return Err(DatasetError::EmptyPart(name));
        }
    }
    let parts = split.parts().map(|(_, p)| p);
    let sizes = parts.map(|p| p.len());

    let test = |variable: String, kind, ones: [usize; 3]| {
        let outcome = match pearson_statistic(&sizes, &ones) {
            Some(statistic) => {
                let p_value = chi_square_sf(statistic, 2.0);
                TestOutcome::Tested { statistic, p_value, flagged: p_value < alpha }
            }
            None => TestOutcome::Degenerate,
        };
        HomogeneityRow { variable, kind, ones, outcome }
    };

    let mut rows = Vec::with_capacity(split.training.schema().len() + 1);
    for (j, name) in split.training.schema().names().enumerate() {
        let ones = parts.map(|p| p.cases().iter().filter(|c| c.values[j]).count());
        rows.push(test(name.to_string(), RowKind::Attribute, ones));
    }
    let ones = parts.map(|p| p.cases().iter().filter(|c| c.label == Some(true)).count());
    rows.push(test("label".to_string(), RowKind::Label, ones));

    Ok(HomogeneityReport { alpha, degrees_of_freedom: 2, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Case, CaseBase};
    use proptest::prelude::*;

    fn part(prefix: &str, n: usize, ones: usize) -> CaseBase {
        let schema = AttributeSchema::from_names(&["a"]).unwrap();
        let cases = (0..n).map(|i| Case::labeled(format!("{prefix}{i}"), vec![i < ones], i % 2 == 0)).collect();
        CaseBase::new(schema, cases).unwrap()
    }

    fn split(parts: [(usize, usize); 3]) -> TriSplit {
        TriSplit {
            training: part("t", parts[0].0, parts[0].1),
            setting: part("s", parts[1].0, parts[1].1),
            evaluation: part("u", parts[2].0, parts[2].1),
            seed: 0,
        }
    }

    #[test]
    fn homogeneous_parts() {
        let report = chi_square_homogeneity(&split([(100, 50), (100, 50), (100, 50)]), 0.05).unwrap();
        assert_eq!(report.rows[0].outcome, TestOutcome::Tested { statistic: 0.0, p_value: 1.0, flagged: false });
        assert_eq!(report.flagged_attributes(), 0);
    }

    #[test]
    fn maximally_heterogeneous_parts() {
        let report = chi_square_homogeneity(&split([(100, 100), (100, 0), (100, 0)]), 0.05).unwrap();
        match report.rows[0].outcome {
            TestOutcome::Tested { statistic, flagged, .. } => {
                assert!((statistic - 300.0).abs() < 1e-9);
                assert!(flagged);
            }
            TestOutcome::Degenerate => panic!("expected a test"),
        }
    }

    #[test]
    fn constant_column_contributes_nothing() {
        let report = chi_square_homogeneity(&split([(10, 0), (10, 0), (10, 0)]), 0.05).unwrap();
        assert!(matches!(report.rows[0].outcome, TestOutcome::Tested { statistic, .. } if statistic == 0.0));
    }

    #[test]
    fn empty_part_is_an_error() {
        assert_eq!(
            chi_square_homogeneity(&split([(10, 5), (0, 0), (10, 5)]), 0.05),
            Err(DatasetError::EmptyPart("setting"))
        );
    }

    #[test]
    fn label_row_is_last() {
        let report = chi_square_homogeneity(&split([(10, 5), (10, 5), (10, 5)]), 0.05).unwrap();
        assert_eq!(report.rows.last().unwrap().kind, RowKind::Label);
    }

    proptest! {
        #[test]
        fn statistic_zero_iff_proportional(sizes in prop::array::uniform3(1usize..40), fr in prop::array::uniform3(0.0f64..1.0)) {
            let ones = [0, 1, 2].map(|i| ((sizes[i] as f64) * fr[i]).floor() as usize);
            let stat = pearson_statistic(&sizes, &ones).unwrap();
            prop_assert!(stat >= 0.0);
            let n: usize = sizes.iter().sum();
            let total: usize = ones.iter().sum();
            let proportional = (0..3).all(|i| ones[i] * n == sizes[i] * total);
            prop_assert_eq!(stat < 1e-9, proportional);
        }
    }
}

use serde::Serialize;

use super::CaseBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    /// Blocks logistic fitting.
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FindingKind {
    NoCases,
    NoLabeledCases,
    UnlabeledCases { count: usize },
    SingleClass { label: bool },
    ConstantAttribute { attribute: String, value: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    #[serde(flatten)]
    pub kind: FindingKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_cases: usize,
    pub n_labeled: usize,
    pub n_positive: usize,
    /// Share of positive labels among labeled cases.
    pub prevalence: Option<f64>,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_fatal(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Fatal)
    }
}

/// Reports counts, label prevalence and degenerate columns. Constant columns
/// (among labeled cases) are fatal for fitting since their coefficient has
/// no standard error.
pub fn validate(cb: &CaseBase) -> ValidationReport {
    let mut findings = Vec::new();
    let mut push = |severity, kind, message: String| findings.push(Finding { severity, kind, message });

    let labeled: Vec<_> = cb.cases().iter().filter(|c| c.label.is_some()).collect();
    let n_positive = labeled.iter().filter(|c| c.label == Some(true)).count();
    let prevalence = (!labeled.is_empty()).then(|| n_positive as f64 / labeled.len() as f64);

    if cb.is_empty() {
        push(Severity::Fatal, FindingKind::NoCases, "no cases".into());
    } else if labeled.is_empty() {
        push(Severity::Fatal, FindingKind::NoLabeledCases, "no labeled cases".into());
    }
    let unlabeled = cb.len() - labeled.len();
    if unlabeled > 0 && !labeled.is_empty() {
        push(Severity::Info, FindingKind::UnlabeledCases { count: unlabeled }, format!("{unlabeled} unlabeled cases"));
    }
    if !labeled.is_empty() && (n_positive == 0 || n_positive == labeled.len()) {
        let label = n_positive > 0;
        push(
            Severity::Fatal,
            FindingKind::SingleClass { label },
            format!("every labeled case has label {}", u8::from(label)),
        );
    }
    if !labeled.is_empty() {
        for (j, name) in cb.schema().names().enumerate() {
            let first = labeled[0].values[j];
            if labeled.iter().all(|c| c.values[j] == first) {
                push(
                    Severity::Fatal,
                    FindingKind::ConstantAttribute { attribute: name.to_string(), value: first },
                    format!("constant attribute: {name}"),
                );
            }
        }
    }

    ValidationReport { n_cases: cb.len(), n_labeled: labeled.len(), n_positive, prevalence, findings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Case};

    #[test]
    fn flags_constant_attribute() {
        let schema = AttributeSchema::from_names(&["age", "hiv"]).unwrap();
        let cases = vec![Case::labeled("p1", vec![true, false], true), Case::labeled("p2", vec![false, false], false)];
        let report = validate(&CaseBase::new(schema, cases).unwrap());
        assert!(report.has_fatal());
        let messages: Vec<_> = report.findings.iter().map(|f| f.message.as_str()).collect();
        assert_eq!(messages, vec!["constant attribute: hiv"]);
    }

    #[test]
    fn reports_prevalence() {
        let schema = AttributeSchema::from_names(&["a"]).unwrap();
        let cases = (0..1137).map(|i| Case::labeled(format!("p{i}"), vec![i % 2 == 0], i < 255)).collect();
        let report = validate(&CaseBase::new(schema, cases).unwrap());
        assert_eq!(report.n_positive, 255);
        assert!((report.prevalence.unwrap() - 0.224).abs() < 5e-4);
        assert!(!report.has_fatal());
    }

    #[test]
    fn empty_case_base() {
        let schema = AttributeSchema::from_names(&["a"]).unwrap();
        let report = validate(&CaseBase::new(schema, vec![]).unwrap());
        assert_eq!(report.findings[0].message, "no cases");
        assert_eq!(report.prevalence, None);
    }
}

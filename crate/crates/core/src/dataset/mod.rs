//! Case bases: binary attribute vectors with optional binary outcomes.
//!
//! Column order of the [`AttributeSchema`] is the order used everywhere else
//! (design matrices, weight vectors, exported tables).

mod csv_io;
mod homogeneity;
mod split;
mod synthetic;
mod validate;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{load_case_base, read_case_base_file, write_case_base};
pub use homogeneity::{chi_square_homogeneity, HomogeneityReport, HomogeneityRow, RowKind, TestOutcome};
pub use split::{random_split, SplitSizes, TriSplit};
pub use synthetic::{generate_synthetic, inject_random_attributes, InformativeAttribute, SyntheticSpec};
pub use validate::{validate, Finding, FindingKind, Severity, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowLength { line: u64, expected: usize, found: usize },
    #[error("line {line}: non-binary value `{value}` in column `{column}`")]
    NonBinary { line: u64, column: String, value: String },
    #[error("duplicate case id `{0}`")]
    DuplicateId(String),
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("empty attribute name")]
    EmptyAttributeName,
    #[error("header must start with `id,label`, found `{0}`")]
    BadHeader(String),
    #[error("case `{id}` has {found} values for a schema of {expected} attributes")]
    SchemaMismatch { id: String, expected: usize, found: usize },
    #[error("split sizes sum to {requested} but the case base holds {available} cases")]
    SizeMismatch { requested: usize, available: usize },
    #[error("case `{0}` is unlabeled")]
    Unlabeled(String),
    #[error("split part `{0}` has no cases")]
    EmptyPart(&'static str),
    #[error("attribute `{0}` already exists")]
    NameCollision(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for DatasetError {
    fn from(e: csv::Error) -> Self {
        DatasetError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Original,
    InjectedRandom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub provenance: Provenance,
}

impl Attribute {
    pub fn original(name: impl Into<String>) -> Self {
        Attribute { name: name.into(), provenance: Provenance::Original }
    }
}

/// Ordered, uniquely named attribute list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(attributes.len());
        for a in &attributes {
            if a.name.is_empty() {
                return Err(DatasetError::EmptyAttributeName);
            }
            if !seen.insert(a.name.as_str()) {
                return Err(DatasetError::DuplicateAttribute(a.name.clone()));
            }
        }
        Ok(AttributeSchema { attributes })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, DatasetError> {
        Self::new(names.iter().map(|n| Attribute::original(n.as_ref())).collect())
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Column indices of `names`, or the first name missing from the schema.
    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, String> {
        names.iter().map(|n| self.index_of(n.as_ref()).ok_or_else(|| n.as_ref().to_string())).collect()
    }

    fn extended(&self, extra: Vec<Attribute>) -> Result<Self, DatasetError> {
        for a in &extra {
            if self.index_of(&a.name).is_some() {
                return Err(DatasetError::NameCollision(a.name.clone()));
            }
        }
        let mut attributes = self.attributes.clone();
        attributes.extend(extra);
        Self::new(attributes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub id: String,
    pub values: Vec<bool>,
    pub label: Option<bool>,
}

impl Case {
    pub fn new(id: impl Into<String>, values: Vec<bool>, label: Option<bool>) -> Self {
        Case { id: id.into(), values, label }
    }

    pub fn labeled(id: impl Into<String>, values: Vec<bool>, label: bool) -> Self {
        Self::new(id, values, Some(label))
    }
}

/// Cases sharing one schema, with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseBase {
    schema: AttributeSchema,
    cases: Vec<Case>,
}

impl CaseBase {
    pub fn new(schema: AttributeSchema, cases: Vec<Case>) -> Result<Self, DatasetError> {
        let mut ids = HashSet::with_capacity(cases.len());
        for c in &cases {
            if c.values.len() != schema.len() {
                return Err(DatasetError::SchemaMismatch {
                    id: c.id.clone(),
                    expected: schema.len(),
                    found: c.values.len(),
                });
            }
            if !ids.insert(c.id.as_str()) {
                return Err(DatasetError::DuplicateId(c.id.clone()));
            }
        }
        Ok(CaseBase { schema, cases })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.cases.iter().all(|c| c.label.is_some())
    }

    /// Labels of a fully labeled case base.
    pub fn labels(&self) -> Result<Vec<bool>, DatasetError> {
        self.cases.iter().map(|c| c.label.ok_or_else(|| DatasetError::Unlabeled(c.id.clone()))).collect()
    }

    /// Same schema, subset of cases (by position).
    pub(crate) fn select(&self, positions: &[usize]) -> CaseBase {
        CaseBase { schema: self.schema.clone(), cases: positions.iter().map(|&i| self.cases[i].clone()).collect() }
    }

    pub fn into_parts(self) -> (AttributeSchema, Vec<Case>) {
        (self.schema, self.cases)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_rejects_duplicates_and_empty_names() {
        assert_eq!(AttributeSchema::from_names(&["a", "b", "a"]), Err(DatasetError::DuplicateAttribute("a".into())));
        assert_eq!(AttributeSchema::from_names(&["a", ""]), Err(DatasetError::EmptyAttributeName));
    }

    #[test]
    fn case_base_rejects_bad_cases() {
        let schema = AttributeSchema::from_names(&["a", "b"]).unwrap();
        let short = vec![Case::labeled("p1", vec![true], true)];
        assert!(matches!(CaseBase::new(schema.clone(), short), Err(DatasetError::SchemaMismatch { .. })));
        let dup = vec![Case::labeled("p1", vec![true, false], true), Case::labeled("p1", vec![false, false], false)];
        assert_eq!(CaseBase::new(schema, dup), Err(DatasetError::DuplicateId("p1".into())));
    }
}

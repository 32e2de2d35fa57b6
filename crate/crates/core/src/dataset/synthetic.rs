use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Attribute, AttributeSchema, Case, CaseBase, DatasetError, Provenance};
use crate::rng;
use crate::stats::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformativeAttribute {
    pub name: String,
    /// Probability that the attribute is 1.
    pub prevalence: f64,
    /// True log-odds effect.
    pub coefficient: f64,
}

impl InformativeAttribute {
    pub fn new(name: impl Into<String>, prevalence: f64, coefficient: f64) -> Self {
        InformativeAttribute { name: name.into(), prevalence, coefficient }
    }
}

/// Planted logistic model used to generate a case base.
///
/// Attributes are independent Bernoulli draws; the label is drawn from the
/// logistic model `intercept + sum(coefficient * value)`. Noise attributes
/// (named `noise_001`, ...) are Bernoulli(0.5) with no effect on the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_cases: usize,
    #[serde(default)]
    pub informative_attributes: Vec<InformativeAttribute>,
    #[serde(default)]
    pub intercept: f64,
    #[serde(default)]
    pub noise_attributes: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Nineteen effects of mixed size and sign, one dominant; the intercept puts
/// the expected label prevalence at 0.23.
const PAPER_SCALE_ATTRIBUTES: [(f64, f64); 19] = [
    (0.45, -2.0),
    (0.30, -0.8),
    (0.20, -0.8),
    (0.15, -1.0),
    (0.40, 0.7),
    (0.35, 0.7),
    (0.50, 0.5),
    (0.25, -0.5),
    (0.30, 0.4),
    (0.20, -0.4),
    (0.55, 0.3),
    (0.35, -0.3),
    (0.45, 0.3),
    (0.25, 0.25),
    (0.40, -0.25),
    (0.30, 0.2),
    (0.20, -0.2),
    (0.50, 0.15),
    (0.35, -0.15),
];
const PAPER_SCALE_INTERCEPT: f64 = -1.077_828_769_532_822;

impl SyntheticSpec {
    /// 1137 cases, 19 informative attributes `f01..f19`, prevalence about 0.23.
    pub fn paper_scale(seed: u64) -> Self {
        SyntheticSpec {
            n_cases: 1137,
            informative_attributes: PAPER_SCALE_ATTRIBUTES
                .iter()
                .enumerate()
                .map(|(i, &(p, b))| InformativeAttribute::new(format!("f{:02}", i + 1), p, b))
                .collect(),
            intercept: PAPER_SCALE_INTERCEPT,
            noise_attributes: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |msg: String| Err(DatasetError::InvalidSpec(msg));
        if self.n_cases == 0 {
            return bad("n_cases must be at least 1".into());
        }
        if !self.intercept.is_finite() {
            return bad("intercept must be finite".into());
        }
        for a in &self.informative_attributes {
            if !(a.prevalence > 0.0 && a.prevalence < 1.0) {
                return bad(format!("prevalence of `{}` must lie strictly inside (0, 1)", a.name));
            }
            if !a.coefficient.is_finite() {
                return bad(format!("coefficient of `{}` must be finite", a.name));
            }
        }
        Ok(())
    }
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    let width = count.to_string().len().max(3);
    (1..=count).map(move |i| format!("{prefix}_{i:0width$}"))
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<CaseBase, DatasetError> {
    spec.validate()?;
    let mut attributes: Vec<Attribute> =
        spec.informative_attributes.iter().map(|a| Attribute::original(&a.name)).collect();
    attributes.extend(numbered("noise", spec.noise_attributes).map(Attribute::original));
    let schema = AttributeSchema::new(attributes)?;

    let mut rng = rng::stream(spec.seed, rng::TAG_SYNTH);
    let id_width = spec.n_cases.to_string().len();
    let cases = (0..spec.n_cases)
        .map(|i| {
            let mut values = Vec::with_capacity(schema.len());
            let mut eta = spec.intercept;
            for a in &spec.informative_attributes {
                let v = rng.random_bool(a.prevalence);
                if v {
                    eta += a.coefficient;
                }
                values.push(v);
            }
            values.extend((0..spec.noise_attributes).map(|_| rng.random_bool(0.5)));
            let label = rng.random::<f64>() < sigmoid(eta);
            Case::labeled(format!("c{:0id_width$}", i + 1), values, label)
        })
        .collect();
    CaseBase::new(schema, cases)
}

/// Appends `count` Bernoulli(0.5) attributes `rnd_001..` drawn under `seed`.
pub fn inject_random_attributes(cb: &CaseBase, count: usize, seed: u64) -> Result<CaseBase, DatasetError> {
    if count == 0 {
        return Ok(cb.clone());
    }
    let extra = numbered("rnd", count).map(|name| Attribute { name, provenance: Provenance::InjectedRandom }).collect();
    let schema = cb.schema().extended(extra)?;
    let mut rng = rng::stream(seed, rng::TAG_INJECT);
    let cases = cb
        .cases()
        .iter()
        .map(|c| {
            let mut values = c.values.clone();
            values.extend((0..count).map(|_| rng.random_bool(0.5)));
            Case::new(c.id.clone(), values, c.label)
        })
        .collect();
    CaseBase::new(schema, cases)
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AttributeMode, ExperimentError, VariantId};
use crate::dataset::{generate_synthetic, read_case_base_file, CaseBase, SplitSizes, SyntheticSpec};
use crate::logistic::FitConfig;
use crate::rng;
use crate::Error;

/// Where the case base comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// CSV case base; relative paths resolve against the plan file.
    Csv { path: PathBuf },
    /// Planted model; its `seed` is replaced by one derived from the master seed.
    Synthetic(SyntheticSpec),
    /// [`SyntheticSpec::paper_scale`].
    PaperScale,
}

/// Experiment configuration, read from a TOML document:
///
/// ```toml
/// seed = 7
/// noise = [0, 50]
/// modes = ["all", "selected"]
/// variants = ["LR", "CBR", "CBR+WA", "CBR+WP", "CBR+WA+WP"]
/// replicates = 500
/// k_max = 50            # optional
/// alpha = 0.05
///
/// [sizes]               # optional, equal thirds by default
/// training = 379
/// setting = 379
/// evaluation = 379
///
/// [data]
/// kind = "paper-scale"  # or "csv" with `path`, or "synthetic" with a spec
///
/// [fit]                 # optional
/// tolerance = 1e-8
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub data: DataSource,
    pub sizes: Option<SplitSizes>,
    pub seed: u64,
    pub noise: Vec<usize>,
    pub modes: Vec<AttributeMode>,
    pub variants: Vec<VariantId>,
    pub replicates: usize,
    pub k_max: Option<usize>,
    pub alpha: f64,
    pub fit: FitConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            data: DataSource::PaperScale,
            sizes: None,
            seed: 1,
            noise: vec![0, 50],
            modes: vec![AttributeMode::All, AttributeMode::Selected],
            variants: VariantId::ALL.to_vec(),
            replicates: 500,
            k_max: None,
            alpha: 0.05,
            fit: FitConfig::default(),
        }
    }
}

impl ExperimentPlan {
    /// Full 5 variants x 2 scenarios x 2 modes grid on paper-scale synthetic data.
    pub fn paper(seed: u64) -> Self {
        ExperimentPlan { seed, ..ExperimentPlan::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))
    }

    /// Reads a plan file, resolving a relative CSV path against its directory.
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        let mut plan = Self::from_toml_str(&text)?;
        if let DataSource::Csv { path: data } = &mut plan.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(plan)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidPlan(m.to_string()));
        if self.variants.is_empty() {
            return bad("no variants requested");
        }
        if self.modes.is_empty() {
            return bad("no attribute modes requested");
        }
        if self.noise.is_empty() {
            return bad("no scenarios requested");
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1");
        }
        if self.k_max == Some(0) {
            return bad("k_max must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        self.fit.validate().map_err(|e| ExperimentError::InvalidPlan(e.to_string()))
    }

    pub fn split_sizes(&self, n: usize) -> SplitSizes {
        self.sizes.unwrap_or_else(|| SplitSizes::thirds(n))
    }

    pub fn load_case_base(&self) -> Result<CaseBase, Error> {
        Ok(match &self.data {
            DataSource::Csv { path } => read_case_base_file(path)?,
            DataSource::Synthetic(spec) => {
                let spec = SyntheticSpec { seed: rng::derive_seed(self.seed, rng::TAG_SYNTH), ..spec.clone() };
                generate_synthetic(&spec)?
            }
            DataSource::PaperScale => {
                generate_synthetic(&SyntheticSpec::paper_scale(rng::derive_seed(self.seed, rng::TAG_SYNTH)))?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let plan = ExperimentPlan::from_toml_str(
            r#"
            seed = 7
            noise = [0, 50]
            modes = ["all", "selected"]
            variants = ["LR", "CBR", "CBR+WA", "CBR+WP", "CBR+WA+WP"]
            replicates = 500
            k_max = 50

            [sizes]
            training = 379
            setting = 379
            evaluation = 379

            [data]
            kind = "paper-scale"
            "#,
        )
        .unwrap();
        assert_eq!(
            plan,
            ExperimentPlan { k_max: Some(50), sizes: Some(SplitSizes::new(379, 379, 379)), ..ExperimentPlan::paper(7) }
        );
    }

    #[test]
    fn parses_csv_and_synthetic_sources() {
        let plan = ExperimentPlan::from_toml_str("[data]\nkind = \"csv\"\npath = \"cases.csv\"\n").unwrap();
        assert_eq!(plan.data, DataSource::Csv { path: "cases.csv".into() });
        let plan = ExperimentPlan::from_toml_str(
            "[data]\nkind = \"synthetic\"\nn_cases = 100\nintercept = -1.0\nnoise_attributes = 2\n\
             [[data.informative_attributes]]\nname = \"x\"\nprevalence = 0.4\ncoefficient = 1.0\n",
        )
        .unwrap();
        match plan.data {
            DataSource::Synthetic(spec) => {
                assert_eq!(spec.n_cases, 100);
                assert_eq!(spec.informative_attributes.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let plan = ExperimentPlan { k_max: Some(20), ..ExperimentPlan::paper(9) };
        assert_eq!(ExperimentPlan::from_toml_str(&plan.to_toml_string()).unwrap(), plan);
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(ExperimentPlan::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentPlan::from_toml_str("variants = [\"CBR+XX\"]").is_err());
        let empty = ExperimentPlan { variants: vec![], ..ExperimentPlan::default() };
        assert!(matches!(empty.validate(), Err(ExperimentError::InvalidPlan(_))));
    }
}

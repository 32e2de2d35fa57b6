use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{CaseBase, DatasetError};
use crate::rng;

/// Requested part sizes; they must add up to the case count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub training: usize,
    pub setting: usize,
    pub evaluation: usize,
}

impl SplitSizes {
    pub fn new(training: usize, setting: usize, evaluation: usize) -> Self {
        SplitSizes { training, setting, evaluation }
    }

    /// Three equal parts; any remainder goes to training.
    pub fn thirds(n: usize) -> Self {
        let third = n / 3;
        SplitSizes::new(n - 2 * third, third, third)
    }

    pub fn total(&self) -> usize {
        self.training + self.setting + self.evaluation
    }
}

/// Disjoint training / setting / evaluation partition of a labeled case base.
#[derive(Debug, Clone, PartialEq)]
pub struct TriSplit {
    pub training: CaseBase,
    pub setting: CaseBase,
    pub evaluation: CaseBase,
    pub seed: u64,
}

impl TriSplit {
    pub fn sizes(&self) -> SplitSizes {
        SplitSizes::new(self.training.len(), self.setting.len(), self.evaluation.len())
    }

    pub fn parts(&self) -> [(&'static str, &CaseBase); 3] {
        [("training", &self.training), ("setting", &self.setting), ("evaluation", &self.evaluation)]
    }
}

/// Uniform random permutation under `seed`, cut in order into the three parts.
pub fn random_split(cb: &CaseBase, sizes: SplitSizes, seed: u64) -> Result<TriSplit, DatasetError> {
    if sizes.total() != cb.len() {
        return Err(DatasetError::SizeMismatch { requested: sizes.total(), available: cb.len() });
    }
    if let Some(c) = cb.cases().iter().find(|c| c.label.is_none()) {
        return Err(DatasetError::Unlabeled(c.id.clone()));
    }
    let mut order: Vec<usize> = (0..cb.len()).collect();
    order.shuffle(&mut rng::stream(seed, rng::TAG_SPLIT));
    let (training, rest) = order.split_at(sizes.training);
    let (setting, evaluation) = rest.split_at(sizes.setting);
    Ok(TriSplit { training: cb.select(training), setting: cb.select(setting), evaluation: cb.select(evaluation), seed })
}

//! AUC, ROC curves and the bootstrap percentile interval.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// Resamples that draw a single class are redrawn at most this many times.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("scored set is empty")]
    Empty,
    #[error("score {index} is not finite")]
    NonFiniteScore { index: usize },
    #[error("AUC needs both labels; only label {} present", u8::from(*.0))]
    SingleClass(bool),
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("every bootstrap replicate drew a single class")]
    AllReplicatesFailed,
    #[error("csv: {0}")]
    Csv(String),
}

/// `(score, label)` pairs with finite scores and both labels present.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
    positives: usize,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self, EvalError> {
        assert_eq!(scores.len(), labels.len(), "one label per score");
        if scores.is_empty() {
            return Err(EvalError::Empty);
        }
        if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
            return Err(EvalError::NonFiniteScore { index });
        }
        let positives = labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == labels.len() {
            return Err(EvalError::SingleClass(positives > 0));
        }
        Ok(ScoredSet { scores, labels, positives })
    }

    pub fn from_pairs(pairs: &[(f64, bool)]) -> Result<Self, EvalError> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives
    }
}

/// Groups of tied scores in descending score order as
/// `(score, positives, negatives)`.
fn tie_groups(scores: &[f64], labels: &[bool]) -> Vec<(f64, u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for i in order {
        let (s, l) = (scores[i], labels[i]);
        match groups.last_mut() {
            Some(g) if g.0 == s => {
                if l {
                    g.1 += 1
                } else {
                    g.2 += 1
                }
            }
            _ => groups.push((s, u64::from(l), u64::from(!l))),
        }
    }
    groups
}

/// Twice the Mann-Whitney count: 2 per correctly ordered pair, 1 per tie.
fn doubled_u(scores: &[f64], labels: &[bool]) -> u64 {
    let mut negatives_below: u64 = labels.iter().filter(|&&l| !l).count() as u64;
    let mut total = 0;
    for (_, pos, neg) in tie_groups(scores, labels) {
        negatives_below -= neg;
        total += 2 * pos * negatives_below + pos * neg;
    }
    total
}

fn auc_of(scores: &[f64], labels: &[bool], positives: usize) -> f64 {
    let pairs = positives as u64 * (labels.len() - positives) as u64;
    doubled_u(scores, labels) as f64 / (2 * pairs) as f64
}

/// Mann-Whitney AUC: the share of (positive, negative) pairs ordered
/// correctly, ties counting one half.
pub fn auc(s: &ScoredSet) -> f64 {
    auc_of(&s.scores, &s.labels, s.positives)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Cases scoring at or above this value are called positive; the first
    /// point uses `+inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC staircase from (0,0) to (1,1), one point per distinct score.
pub fn roc_points(s: &ScoredSet) -> Vec<RocPoint> {
    let (p, n) = (s.positives() as f64, s.negatives() as f64);
    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    for (score, pos, neg) in tie_groups(&s.scores, &s.labels) {
        tp += pos;
        fp += neg;
        points.push(RocPoint { threshold: score, fpr: fp as f64 / n, tpr: tp as f64 / p });
    }
    points
}

/// Trapezoidal area under a ROC staircase.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}

pub fn write_roc_csv<W: Write>(points: &[RocPoint], sink: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| EvalError::Csv(e.to_string());
    w.write_record(["threshold", "fpr", "tpr"]).map_err(err)?;
    for p in points {
        w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| EvalError::Csv(e.to_string()))
}

/// Bootstrap AUC summary as written to report files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucEstimate {
    pub point_auc: f64,
    /// Mean of the replicate AUCs.
    pub boot_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of replicates that contributed (failed ones are excluded).
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    pub estimate: AucEstimate,
    /// Replicate AUCs in replicate-index order, failed replicates omitted.
    pub replicate_aucs: Vec<f64>,
    pub failed: usize,
}

/// Percentile of sorted data by linear interpolation between order
/// statistics: 1-based rank `h = (n - 1) q + 1`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One resample of `s`; `None` if every draw was single-class.
fn replicate(s: &ScoredSet, seed: u64, index: usize) -> Option<f64> {
    let mut rng = rng::indexed_stream(seed, rng::TAG_BOOTSTRAP, index as u64);
    let n = s.len();
    let mut scores = vec![0.0; n];
    let mut labels = vec![false; n];
    for _ in 0..=MAX_REDRAWS {
        let mut positives = 0;
        for k in 0..n {
            let i = rng.random_range(0..n);
            scores[k] = s.scores[i];
            labels[k] = s.labels[i];
            positives += usize::from(s.labels[i]);
        }
        if positives > 0 && positives < n {
            return Some(auc_of(&scores, &labels, positives));
        }
    }
    None
}

fn run_replicates(s: &ScoredSet, k: usize, seed: u64) -> Vec<Option<f64>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..k).into_par_iter().map(|i| replicate(s, seed, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..k).map(|i| replicate(s, seed, i)).collect()
    }
}

/// Summarizes replicate AUCs (in index order) into an [`AucEstimate`].
pub fn summarize_replicates(point_auc: f64, replicate_aucs: &[f64], seed: u64) -> Result<AucEstimate, EvalError> {
    if replicate_aucs.is_empty() {
        return Err(EvalError::AllReplicatesFailed);
    }
    let boot_mean = replicate_aucs.iter().sum::<f64>() / replicate_aucs.len() as f64;
    let mut sorted = replicate_aucs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(AucEstimate {
        point_auc,
        boot_mean,
        ci_low: percentile(&sorted, 0.025),
        ci_high: percentile(&sorted, 0.975),
        replicates: replicate_aucs.len(),
        seed,
    })
}

/// `k` resamples with replacement of size `|s|`, each on its own random
/// stream derived from `(seed, index)`, so the result does not depend on
/// how replicates are scheduled.
pub fn bootstrap_auc(s: &ScoredSet, k: usize, seed: u64) -> Result<BootstrapOutcome, EvalError> {
    if k == 0 {
        return Err(EvalError::NoReplicates);
    }
    let results = run_replicates(s, k, seed);
    let failed = results.iter().filter(|r| r.is_none()).count();
    let replicate_aucs: Vec<f64> = results.into_iter().flatten().collect();
    let estimate = summarize_replicates(auc(s), &replicate_aucs, seed)?;
    Ok(BootstrapOutcome { estimate, replicate_aucs, failed })
}

/// Sequential reference for [`bootstrap_auc`].
pub fn bootstrap_auc_sequential(s: &ScoredSet, k: usize, seed: u64) -> Result<BootstrapOutcome, EvalError> {
    if k == 0 {
        return Err(EvalError::NoReplicates);
    }
    let results: Vec<_> = (0..k).map(|i| replicate(s, seed, i)).collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    let replicate_aucs: Vec<f64> = results.into_iter().flatten().collect();
    let estimate = summarize_replicates(auc(s), &replicate_aucs, seed)?;
    Ok(BootstrapOutcome { estimate, replicate_aucs, failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_auc(s: &ScoredSet) -> f64 {
        let mut count = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in s.scores().iter().enumerate() {
            for (j, &sj) in s.scores().iter().enumerate() {
                if s.labels()[i] && !s.labels()[j] {
                    pairs += 1.0;
                    count += if si > sj {
                        1.0
                    } else if si == sj {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        count / pairs
    }

    #[test]
    fn perfect_separation() {
        let s = ScoredSet::from_pairs(&[(0.9, true), (0.9, true), (0.1, false), (0.1, false)]).unwrap();
        assert_eq!(auc(&s), 1.0);
        let roc = roc_points(&s);
        assert!(roc.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
    }

    #[test]
    fn all_ties() {
        let s = ScoredSet::from_pairs(&[(0.3, true), (0.3, false), (0.3, false)]).unwrap();
        assert_eq!(auc(&s), 0.5);
        let roc = roc_points(&s);
        assert_eq!(roc.len(), 2);
        assert_eq!((roc[1].fpr, roc[1].tpr), (1.0, 1.0));
        assert_eq!(trapezoid_area(&roc), 0.5);
    }

    #[test]
    fn four_case_example() {
        let s = ScoredSet::from_pairs(&[(0.8, true), (0.4, true), (0.6, false), (0.2, false)]).unwrap();
        assert_eq!(auc(&s), 0.75);
        assert_eq!(pairwise_auc(&s), 0.75);
        assert_eq!(trapezoid_area(&roc_points(&s)), 0.75);
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(ScoredSet::from_pairs(&[(0.1, true), (0.2, true)]), Err(EvalError::SingleClass(true)));
        assert_eq!(ScoredSet::from_pairs(&[]), Err(EvalError::Empty));
        assert!(matches!(ScoredSet::from_pairs(&[(f64::NAN, true)]), Err(EvalError::NonFiniteScore { index: 0 })));
    }

    #[test]
    fn percentile_interpolates() {
        let data: Vec<f64> = (1..=5).map(f64::from).collect();
        assert_eq!(percentile(&data, 0.0), 1.0);
        assert_eq!(percentile(&data, 1.0), 5.0);
        assert_eq!(percentile(&data, 0.5), 3.0);
        assert!((percentile(&data, 0.025) - 1.1).abs() < 1e-12);
        assert!((percentile(&data, 0.975) - 4.9).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_of_perfect_ranking() {
        let s = ScoredSet::from_pairs(&[(0.9, true), (0.8, true), (0.2, false), (0.1, false)]).unwrap();
        let out = bootstrap_auc(&s, 200, 3).unwrap();
        assert_eq!(out.estimate.boot_mean, 1.0);
        assert_eq!((out.estimate.ci_low, out.estimate.ci_high), (1.0, 1.0));
        assert_eq!(out.estimate.replicates + out.failed, 200);
    }

    #[test]
    fn bootstrap_is_deterministic_and_schedule_free() {
        let pairs: Vec<(f64, bool)> = (0..379).map(|i| ((i * 37 % 101) as f64 / 101.0, i % 4 == 0)).collect();
        let s = ScoredSet::from_pairs(&pairs).unwrap();
        let a = bootstrap_auc(&s, 500, 17).unwrap();
        assert_eq!(a, bootstrap_auc(&s, 500, 17).unwrap());
        assert_eq!(a, bootstrap_auc_sequential(&s, 500, 17).unwrap());
        assert_eq!(a.estimate.replicates, 500);
        assert!(a.estimate.ci_low <= a.estimate.ci_high);
    }

    #[test]
    fn bootstrap_rejects_zero_replicates() {
        let s = ScoredSet::from_pairs(&[(0.9, true), (0.1, false)]).unwrap();
        assert_eq!(bootstrap_auc(&s, 0, 1), Err(EvalError::NoReplicates));
    }

    fn scored_set() -> impl Strategy<Value = ScoredSet> {
        prop::collection::vec((0u8..12, any::<bool>()), 2..200)
            .prop_filter("both labels", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
            .prop_map(|v| {
                let pairs: Vec<(f64, bool)> = v.into_iter().map(|(s, l)| (f64::from(s) / 11.0, l)).collect();
                ScoredSet::from_pairs(&pairs).unwrap()
            })
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle(s in scored_set()) {
            prop_assert_eq!(auc(&s), pairwise_auc(&s));
            prop_assert!((trapezoid_area(&roc_points(&s)) - auc(&s)).abs() <= 1e-12);
        }

        #[test]
        fn invariant_under_monotone_transform(s in scored_set()) {
            let transformed: Vec<f64> = s.scores().iter().map(|x| (3.0 * x).exp() - 7.0).collect();
            let t = ScoredSet::new(transformed, s.labels().to_vec()).unwrap();
            prop_assert_eq!(auc(&s), auc(&t));
        }

        #[test]
        fn flipping_labels_complements_tie_free_auc(v in prop::collection::vec(any::<bool>(), 2..100)) {
            prop_assume!(v.iter().any(|&l| l) && v.iter().any(|&l| !l));
            let scores: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            let s = ScoredSet::new(scores.clone(), v.clone()).unwrap();
            let f = ScoredSet::new(scores, v.iter().map(|l| !l).collect()).unwrap();
            prop_assert!((auc(&s) + auc(&f) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn roc_is_monotone(s in scored_set()) {
            let roc = roc_points(&s);
            prop_assert_eq!((roc[0].fpr, roc[0].tpr), (0.0, 0.0));
            let last = roc.last().unwrap();
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for w in roc.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            }
        }
    }
}

//! WebAssembly bindings behind the static page in `www/`.
//!
//! Each exported function returns a JSON string. The `*_json` functions hold
//! the logic and run natively; the `#[wasm_bindgen]` wrappers only convert
//! errors into JavaScript exceptions.

use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

use lrcbr::dataset::{generate_synthetic, inject_random_attributes, random_split, SplitSizes, SyntheticSpec, TriSplit};
use lrcbr::evaluation::{auc, bootstrap_auc, roc_points};
use lrcbr::experiment::{run_variant, VariantConfig, VariantId};
use lrcbr::logistic::{fit, stepwise_select, FitConfig, LogisticModel};
use lrcbr::retrieval::{fuse, Neighbor, ZeroDistanceRule};

/// K-NN tuning bound used by the demo; keeps each call well under a second.
const DEMO_K_MAX: usize = 30;

struct Scenario {
    split: TriSplit,
    model: LogisticModel,
}

fn scenario(seed: u32, noise: usize, selected: bool) -> Result<Scenario, String> {
    let seed = u64::from(seed);
    let base = generate_synthetic(&SyntheticSpec::paper_scale(seed)).map_err(|e| e.to_string())?;
    let cb = inject_random_attributes(&base, noise, seed).map_err(|e| e.to_string())?;
    let split = random_split(&cb, SplitSizes::new(379, 379, 379), seed).map_err(|e| e.to_string())?;
    let config = FitConfig::default();
    let model = if selected {
        stepwise_select(&split.training, &config).map(|r| r.model)
    } else {
        fit(&split.training, &config)
    }
    .map_err(|e| e.to_string())?;
    Ok(Scenario { split, model })
}

/// ROC curve and AUC of every variant on one paper-scale scenario.
pub fn roc_curves_json(seed: u32, noise: usize, selected: bool) -> Result<String, String> {
    let s = scenario(seed, noise, selected)?;
    let config = VariantConfig { k_max: Some(DEMO_K_MAX) };
    let mut curves = Vec::new();
    for variant in VariantId::ALL {
        let out = run_variant(variant, &s.split, &s.model, &config).map_err(|e| e.to_string())?;
        let points: Vec<[f64; 2]> = roc_points(&out.scores).iter().map(|p| [p.fpr, p.tpr]).collect();
        curves.push(json!({ "variant": variant, "auc": auc(&out.scores), "k": out.k, "roc": points }));
    }
    Ok(json!({
        "seed": seed,
        "noise": noise,
        "n_attributes": s.split.training.schema().len(),
        "selected_attributes": s.model.selected_attributes,
        "curves": curves,
    })
    .to_string())
}

/// Bootstrap replicate AUCs of one variant, for a histogram.
pub fn bootstrap_json(seed: u32, noise: usize, variant: &str, replicates: usize) -> Result<String, String> {
    let variant: VariantId = variant.parse().map_err(|e: lrcbr::experiment::ExperimentError| e.to_string())?;
    let s = scenario(seed, noise, false)?;
    let out = run_variant(variant, &s.split, &s.model, &VariantConfig { k_max: Some(DEMO_K_MAX) })
        .map_err(|e| e.to_string())?;
    let boot = bootstrap_auc(&out.scores, replicates, u64::from(seed)).map_err(|e| e.to_string())?;
    Ok(json!({
        "variant": variant,
        "estimate": boot.estimate,
        "replicate_aucs": boot.replicate_aucs,
        "failed": boot.failed,
    })
    .to_string())
}

#[derive(Debug, Deserialize)]
struct NeighborInput {
    distance: f64,
    label: bool,
    weight: f64,
}

#[derive(Debug, Serialize)]
struct FusionOutput {
    score: f64,
    /// Share of each neighbour in the fused score's denominator.
    shares: Vec<f64>,
}

/// Fused score of hand-entered neighbours and each neighbour's share.
pub fn fusion_json(neighbors: &str) -> Result<String, String> {
    let input: Vec<NeighborInput> = serde_json::from_str(neighbors).map_err(|e| e.to_string())?;
    if input.iter().any(|n| !(n.distance >= 0.0 && n.weight > 0.0)) {
        return Err("distances must be non-negative and weights positive".into());
    }
    let list: Vec<Neighbor> = input
        .iter()
        .enumerate()
        .map(|(i, n)| Neighbor {
            case_id: format!("n{i}"),
            distance: n.distance,
            label: n.label,
            raw_case_weight: n.weight,
        })
        .collect();
    let score = fuse(&list, ZeroDistanceRule::ExactMatchLimit).map_err(|e| e.to_string())?;
    let exact = input.iter().any(|n| n.distance == 0.0);
    let mass: Vec<f64> = input
        .iter()
        .map(|n| match (exact, n.distance == 0.0) {
            (true, true) => n.weight,
            (true, false) => 0.0,
            (false, _) => n.weight / n.distance,
        })
        .collect();
    let total: f64 = mass.iter().sum();
    let out = FusionOutput { score, shares: mass.iter().map(|m| m / total).collect() };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[wasm_bindgen]
pub fn roc_curves(seed: u32, noise: usize, selected: bool) -> Result<String, JsError> {
    roc_curves_json(seed, noise, selected).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bootstrap_distribution(seed: u32, noise: usize, variant: &str, replicates: usize) -> Result<String, JsError> {
    bootstrap_json(seed, noise, variant, replicates).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fuse_neighbors(neighbors: &str) -> Result<String, JsError> {
    fusion_json(neighbors).map_err(|e| JsError::new(&e))
}

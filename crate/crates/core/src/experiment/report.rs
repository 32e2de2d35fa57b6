use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{ExperimentError, ResultTable};
use crate::weighting::AttributeWeightSource;
use crate::Error;

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn weights_csv(fit: &super::ModeFit) -> Result<Vec<u8>, Error> {
    let mut buf = Vec::new();
    match &fit.wald_weights {
        Some(w) => w.write_csv(&mut buf)?,
        None => writeln!(buf, "attribute,weight,source").expect("vec write"),
    }
    Ok(buf)
}

fn auc_csv(table: &ResultTable, noise: usize, mode: super::AttributeMode) -> Result<Vec<u8>, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ExperimentError::Io(e.to_string());
    w.write_record(["variant", "point_auc", "boot_mean", "ci_low", "ci_high", "replicates", "k", "status"])
        .map_err(csv_err)?;
    for row in table.rows.iter().filter(|r| r.noise == noise && r.mode == mode) {
        let record: Vec<String> = match &row.outcome {
            Ok(cell) => vec![
                row.variant.to_string(),
                cell.auc.point_auc.to_string(),
                cell.auc.boot_mean.to_string(),
                cell.auc.ci_low.to_string(),
                cell.auc.ci_high.to_string(),
                cell.auc.replicates.to_string(),
                cell.k.map(|k| k.to_string()).unwrap_or_default(),
                "ok".to_string(),
            ],
            Err(msg) => {
                let mut r = vec![row.variant.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r.push(format!("error: {msg}"));
                r
            }
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))
}

fn manifest(table: &ResultTable, files: &[String]) -> Value {
    let scenarios: Vec<Value> = table
        .scenarios
        .iter()
        .map(|s| {
            let fits: Vec<Value> = s
                .fits
                .iter()
                .map(|f| match &f.model {
                    Ok(m) => json!({
                        "mode": f.mode,
                        "selected_attributes": m.selected_attributes,
                        "excluded_attributes": f.excluded,
                        "aic": m.aic,
                        "log_likelihood": m.log_likelihood,
                        "converged": m.converged,
                        "iterations": m.iterations,
                        "steps": f.steps,
                    }),
                    Err(e) => json!({ "mode": f.mode, "error": e }),
                })
                .collect();
            json!({
                "noise": s.noise,
                "n_attributes": s.attributes.len(),
                "split": s.split.sizes(),
                "homogeneity": s.homogeneity,
                "fits": fits,
            })
        })
        .collect();
    let cells: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut v = json!({ "noise": r.noise, "mode": r.mode, "variant": r.variant });
            match &r.outcome {
                Ok(cell) => {
                    v["auc"] = json!(cell.auc);
                    v["k"] = json!(cell.k);
                    if let Some(w) = &cell.attribute_weights {
                        let source = match w.source {
                            AttributeWeightSource::Wald => "wald",
                            AttributeWeightSource::Uniform => "uniform",
                        };
                        v["attribute_weights"] = json!({ "source": source, "weights": w.weights });
                    }
                }
                Err(e) => v["error"] = json!(e),
            }
            v
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": table.plan.seed,
        "plan": table.plan,
        "files": files,
        "scenarios": scenarios,
        "cells": cells,
    })
}

/// Writes `weights_noise{N}_{mode}.csv` and `auc_noise{N}_{mode}.csv` for
/// every scenario and mode, plus `manifest.json`. Returns the written paths.
/// Nothing is written for an empty table.
pub fn emit_reports(table: &ResultTable, out_dir: &Path) -> Result<Vec<PathBuf>, Error> {
    if table.rows.is_empty() {
        return Err(ExperimentError::EmptyTable.into());
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut written = Vec::new();
    for s in &table.scenarios {
        for fit in &s.fits {
            let stem = format!("noise{}_{}", s.noise, fit.mode);
            let path = out_dir.join(format!("weights_{stem}.csv"));
            write_atomic(&path, &weights_csv(fit)?)?;
            written.push(path);
            let path = out_dir.join(format!("auc_{stem}.csv"));
            write_atomic(&path, &auc_csv(table, s.noise, fit.mode)?)?;
            written.push(path);
        }
    }
    let names: Vec<String> =
        written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest(table, &names)).expect("manifest serializes");
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    written.push(path);
    Ok(written)
}

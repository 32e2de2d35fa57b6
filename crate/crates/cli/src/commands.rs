use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use lrcbr::dataset::{
    chi_square_homogeneity, generate_synthetic, inject_random_attributes, random_split, read_case_base_file,
    write_case_base, CaseBase, SplitSizes, SyntheticSpec, TestOutcome,
};
use lrcbr::evaluation::{bootstrap_auc, roc_points, write_roc_csv, ScoredSet};
use lrcbr::experiment::{emit_reports, run_matrix, variant_weights, write_atomic, ExperimentPlan, VariantId};
use lrcbr::logistic::{fit, stepwise_select, FitConfig, FitError, LogisticModel};
use lrcbr::retrieval::{default_k_max, tune_k, RetrievalConfig, Retriever};

use crate::output::{csv_bytes, emit, json_bytes, CliError};
use crate::{
    Cli, Command, EvalArgs, ExperimentArgs, FitArgs, Format, PredictArgs, SplitArgs, SynthArgs, TuneKArgs, WeightsArgs,
    DEFAULT_SEED,
};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => synth(cli, a),
        Command::Split(a) => split(cli, a),
        Command::Fit(a) => fit_model(cli, a),
        Command::Weights(a) => weights(cli, a),
        Command::TuneK(a) => tune(cli, a),
        Command::Predict(a) => predict(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::Experiment(a) => experiment(cli, a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(path, e))
}

fn read_model(path: &Path) -> Result<LogisticModel, CliError> {
    LogisticModel::from_json(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn read_cases(path: &Path) -> Result<CaseBase, CliError> {
    Ok(read_case_base_file(path)?)
}

fn synth(cli: &Cli, args: &SynthArgs) -> Result<(), CliError> {
    let mut spec = match &args.spec {
        Some(path) => toml::from_str::<SyntheticSpec>(&read_text(path)?).map_err(|e| CliError::input(path, e))?,
        None => SyntheticSpec::paper_scale(DEFAULT_SEED),
    };
    spec.seed = cli.seed.unwrap_or(DEFAULT_SEED);
    if let Some(n) = args.cases {
        spec.n_cases = n;
    }
    let cb = inject_random_attributes(&generate_synthetic(&spec)?, args.noise, spec.seed)?;
    let mut buf = Vec::new();
    write_case_base(&cb, &mut buf)?;
    emit(cli.out.as_deref(), &buf)
}

fn split(cli: &Cli, args: &SplitArgs) -> Result<(), CliError> {
    let out = cli.out.as_deref().ok_or_else(|| CliError::Usage("split requires --out <DIR>".into()))?;
    let cb = read_cases(&args.data)?;
    let sizes = args.sizes.unwrap_or_else(|| SplitSizes::thirds(cb.len()));
    let split = random_split(&cb, sizes, cli.seed.unwrap_or(DEFAULT_SEED))?;
    let report = chi_square_homogeneity(&split, args.alpha)?;
    fs::create_dir_all(out).map_err(|e| CliError::input(out, e))?;
    for (name, part) in split.parts() {
        let mut buf = Vec::new();
        write_case_base(part, &mut buf)?;
        write_atomic(&out.join(format!("{name}.csv")), &buf)?;
    }
    let (file, bytes) = match cli.format {
        Format::Json => ("homogeneity.json", json_bytes(&report)),
        Format::Csv => {
            let rows = report.rows.iter().map(|r| {
                let (stat, p, flagged) = match r.outcome {
                    TestOutcome::Tested { statistic, p_value, flagged } => {
                        (statistic.to_string(), p_value.to_string(), flagged.to_string())
                    }
                    TestOutcome::Degenerate => (String::new(), String::new(), "degenerate".to_string()),
                };
                let kind = serde_json::to_value(r.kind).unwrap().as_str().unwrap_or_default().to_string();
                let [t, s, u] = r.ones.map(|x| x.to_string());
                vec![r.variable.clone(), kind, t, s, u, stat, p, flagged]
            });
            let header = [
                "variable",
                "kind",
                "ones_training",
                "ones_setting",
                "ones_evaluation",
                "statistic",
                "p_value",
                "flagged",
            ];
            ("homogeneity.csv", csv_bytes(&header, rows))
        }
    };
    write_atomic(&out.join(file), &bytes)?;
    Ok(())
}

fn fit_model(cli: &Cli, args: &FitArgs) -> Result<(), CliError> {
    let train = read_cases(&args.train)?;
    let defaults = FitConfig::default();
    let config = FitConfig {
        tolerance: args.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
        ..defaults
    };
    let model = if args.stepwise {
        let result = stepwise_select(&train, &config)?;
        if !result.excluded.is_empty() && !args.exclude_separating {
            return Err(FitError::Separation(result.excluded).into());
        }
        result.model
    } else {
        fit(&train, &config)?
    };
    let bytes = match cli.format {
        Format::Json => {
            let mut text = model.to_json();
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => {
            let intercept = vec![
                "(intercept)".to_string(),
                model.intercept.to_string(),
                model.intercept_std_error.to_string(),
                String::new(),
            ];
            let rows = model.wald_statistics()?.into_iter().map(|w| {
                vec![w.attribute, w.coefficient.to_string(), w.std_error.to_string(), w.statistic.to_string()]
            });
            csv_bytes(&["attribute", "coefficient", "std_error", "wald"], std::iter::once(intercept).chain(rows))
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn weights(cli: &Cli, args: &WeightsArgs) -> Result<(), CliError> {
    let model = read_model(&args.variant.model)?;
    let train = read_cases(&args.train)?;
    let variant = args.variant.variant;
    if !variant.is_knn() {
        return Err(CliError::Usage("weights apply to the K-NN variants only".into()));
    }
    let (w_a, w_p) = variant_weights(variant, &train, &model)?;
    if let Some(path) = &args.case_weights {
        let mut buf = Vec::new();
        w_p.write_csv(&train, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    let bytes = match cli.format {
        Format::Json => {
            let cases: Vec<_> =
                train.cases().iter().zip(&w_p.raw).map(|(c, w)| json!({ "case_id": c.id, "raw_weight": w })).collect();
            json_bytes(&json!({
                "variant": variant,
                "attribute_weights": w_a,
                "case_weights": { "source": w_p.source.to_string(), "weights": cases },
            }))
        }
        Format::Csv => {
            let mut buf = Vec::new();
            w_a.write_csv(&mut buf)?;
            buf
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn k_max_for(requested: Option<usize>, n_training: usize) -> usize {
    requested.unwrap_or_else(|| default_k_max(n_training)).min(n_training)
}

fn knn_variant(variant: VariantId) -> Result<(), CliError> {
    if variant.is_knn() {
        Ok(())
    } else {
        Err(CliError::Usage("LR has no neighbour count to tune".into()))
    }
}

fn tune(cli: &Cli, args: &TuneKArgs) -> Result<(), CliError> {
    let variant = args.variant.variant;
    knn_variant(variant)?;
    let model = read_model(&args.variant.model)?;
    let train = read_cases(&args.train)?;
    let setting = read_cases(&args.setting)?;
    let (w_a, w_p) = variant_weights(variant, &train, &model)?;
    let k_max = k_max_for(args.k_max, train.len());
    let tuning = tune_k(&train, &setting, &w_a, &w_p, k_max)?;
    let bytes = match cli.format {
        Format::Json => json_bytes(&json!({
            "variant": variant,
            "k": tuning.k,
            "k_max": k_max,
            "metric_by_k": tuning.metric_by_k,
        })),
        Format::Csv => csv_bytes(
            &["k", "setting_auc"],
            tuning.metric_by_k.iter().enumerate().map(|(i, m)| vec![(i + 1).to_string(), m.to_string()]),
        ),
    };
    emit(cli.out.as_deref(), &bytes)
}

struct Scored {
    case_id: String,
    score: f64,
    label: Option<bool>,
    out_of_coverage: bool,
}

fn predict(cli: &Cli, args: &PredictArgs) -> Result<(), CliError> {
    let variant = args.variant.variant;
    let model = read_model(&args.variant.model)?;
    let query = read_cases(&args.query)?;
    let (scored, k) = if variant.is_knn() {
        let train_path = args.train.as_deref().ok_or_else(|| CliError::Usage(format!("{variant} requires --train")))?;
        let train = read_cases(train_path)?;
        let (w_a, w_p) = variant_weights(variant, &train, &model)?;
        let (k, k_max) = match (args.k, &args.setting) {
            (Some(k), _) => (k, args.k_max.unwrap_or(train.len())),
            (None, Some(setting)) => {
                let k_max = k_max_for(args.k_max, train.len());
                (tune_k(&train, &read_cases(setting)?, &w_a, &w_p, k_max)?.k, k_max)
            }
            (None, None) => return Err(CliError::Usage("give --k or --setting to tune it".into())),
        };
        let retriever = Retriever::new(&train, &w_a, &w_p)?;
        let predictions = retriever.predict_batch(&query, &RetrievalConfig::new(k, k_max))?;
        let scored = predictions
            .into_iter()
            .zip(query.cases())
            .map(|(p, c)| Scored {
                case_id: p.case_id,
                score: p.score,
                label: c.label,
                out_of_coverage: p.out_of_coverage,
            })
            .collect::<Vec<_>>();
        (scored, Some(k))
    } else {
        let scores = model.predict_case_base(&query)?;
        let scored = query
            .cases()
            .iter()
            .zip(scores)
            .map(|(c, score)| Scored { case_id: c.id.clone(), score, label: c.label, out_of_coverage: false })
            .collect();
        (scored, None)
    };
    let bytes = match cli.format {
        Format::Json => {
            let rows: Vec<_> = scored
                .iter()
                .map(|s| {
                    json!({ "case_id": s.case_id, "score": s.score, "label": s.label, "out_of_coverage": s.out_of_coverage })
                })
                .collect();
            json_bytes(&json!({ "variant": variant, "k": k, "predictions": rows }))
        }
        Format::Csv => csv_bytes(
            &["case_id", "score", "label"],
            scored.iter().map(|s| {
                let label = s.label.map(|l| if l { "1" } else { "0" }).unwrap_or_default();
                vec![s.case_id.clone(), s.score.to_string(), label.to_string()]
            }),
        ),
    };
    emit(cli.out.as_deref(), &bytes)
}

fn parse_label(path: &Path, line: u64, cell: &str) -> Result<bool, CliError> {
    match cell.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(CliError::input(path, format!("line {line}: label `{other}` is not 0 or 1"))),
    }
}

fn read_scores(path: &Path) -> Result<ScoredSet, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::input(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::input(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::input(path, format!("missing `{name}` column")))
    };
    let (score_col, label_col) = (column("score")?, column("label")?);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let score = record[score_col]
            .trim()
            .parse::<f64>()
            .map_err(|e| CliError::input(path, format!("line {line}: score: {e}")))?;
        scores.push(score);
        labels.push(parse_label(path, line, &record[label_col])?);
    }
    Ok(ScoredSet::new(scores, labels)?)
}

fn eval(cli: &Cli, args: &EvalArgs) -> Result<(), CliError> {
    let scored = read_scores(&args.scores)?;
    let outcome = bootstrap_auc(&scored, args.replicates, cli.seed.unwrap_or(DEFAULT_SEED))?;
    if let Some(path) = &args.roc {
        let mut buf = Vec::new();
        write_roc_csv(&roc_points(&scored), &mut buf)?;
        write_atomic(path, &buf)?;
    }
    if let Some(path) = &args.dump_replicates {
        let rows = outcome.replicate_aucs.iter().enumerate().map(|(i, a)| vec![i.to_string(), a.to_string()]);
        write_atomic(path, &csv_bytes(&["index", "auc"], rows))?;
    }
    let e = &outcome.estimate;
    let bytes = match cli.format {
        Format::Json => json_bytes(e),
        Format::Csv => csv_bytes(
            &["point_auc", "boot_mean", "ci_low", "ci_high", "replicates", "seed"],
            [vec![
                e.point_auc.to_string(),
                e.boot_mean.to_string(),
                e.ci_low.to_string(),
                e.ci_high.to_string(),
                e.replicates.to_string(),
                e.seed.to_string(),
            ]],
        ),
    };
    emit(cli.out.as_deref(), &bytes)
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<(), CliError> {
    let mut plan = ExperimentPlan::from_file(&args.plan)?;
    if let Some(seed) = cli.seed {
        plan.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("reports"));
    let table = run_matrix(&plan)?;
    let files = emit_reports(&table, &out)?;
    let failed = table.rows.iter().filter(|r| r.outcome.is_err()).count();
    for f in &files {
        println!("{}", f.display());
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed; see the AUC reports", table.rows.len());
    }
    Ok(())
}

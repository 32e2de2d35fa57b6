use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lrcbr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrcbr")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lrcbr(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().find(|l| l.starts_with('{')).expect("json diagnostic line");
    serde_json::from_str(line).unwrap()
}

const SMALL_SPEC: &str = r#"
n_cases = 450
intercept = -0.8
noise_attributes = 3

[[informative_attributes]]
name = "a"
prevalence = 0.4
coefficient = 1.5

[[informative_attributes]]
name = "b"
prevalence = 0.3
coefficient = -1.0
"#;

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("spec.toml"), SMALL_SPEC).unwrap();
    ok(d, &["synth", "--spec", "spec.toml", "--seed", "3", "--out", "cases.csv"]);
    let cases = fs::read_to_string(d.join("cases.csv")).unwrap();
    assert!(cases.starts_with("id,label,a,b,noise_001"));
    assert_eq!(cases.lines().count(), 451);

    ok(d, &["split", "--data", "cases.csv", "--seed", "3", "--out", "parts"]);
    for f in ["training.csv", "setting.csv", "evaluation.csv", "homogeneity.json"] {
        assert!(d.join("parts").join(f).exists(), "{f}");
    }
    assert_eq!(fs::read_to_string(d.join("cases.csv")).unwrap(), cases, "input was modified");

    ok(d, &["fit", "--train", "parts/training.csv", "--out", "model.json"]);
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["selected_attributes"].as_array().unwrap().len(), 5);

    let weights = ok(d, &["weights", "--model", "model.json", "--train", "parts/training.csv", "--format", "csv"]);
    assert!(weights.starts_with("attribute,weight,source"));
    assert_eq!(weights.lines().count(), 6);

    let tuned = ok(
        d,
        &[
            "tune-k",
            "--model",
            "model.json",
            "--train",
            "parts/training.csv",
            "--setting",
            "parts/setting.csv",
            "--k-max",
            "20",
        ],
    );
    let tuned: serde_json::Value = serde_json::from_str(&tuned).unwrap();
    let k = tuned["k"].as_u64().unwrap();
    assert!((1..=20).contains(&k));
    assert_eq!(tuned["metric_by_k"].as_array().unwrap().len(), 20);

    ok(
        d,
        &[
            "predict",
            "--model",
            "model.json",
            "--train",
            "parts/training.csv",
            "--query",
            "parts/evaluation.csv",
            "--k",
            &k.to_string(),
            "--format",
            "csv",
            "--out",
            "scores.csv",
        ],
    );
    let scores = fs::read_to_string(d.join("scores.csv")).unwrap();
    assert!(scores.starts_with("case_id,score,label"));
    assert_eq!(scores.lines().count(), 151);

    let report = ok(d, &["eval", "--scores", "scores.csv", "--replicates", "500", "--roc", "roc.csv"]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["replicates"], 500);
    assert_eq!(report["seed"], 1);
    let auc = report["point_auc"].as_f64().unwrap();
    assert!(auc > 0.5 && auc <= 1.0);
    assert!(report["ci_low"].as_f64().unwrap() <= report["ci_high"].as_f64().unwrap());
    assert!(fs::read_to_string(d.join("roc.csv")).unwrap().starts_with("threshold,fpr,tpr"));

    let lr = ok(d, &["predict", "--model", "model.json", "--variant", "LR", "--query", "parts/evaluation.csv"]);
    let lr: serde_json::Value = serde_json::from_str(&lr).unwrap();
    assert_eq!(lr["predictions"].as_array().unwrap().len(), 150);
    assert!(lr["k"].is_null());
}

#[test]
fn seed_defaults_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("spec.toml"), SMALL_SPEC).unwrap();
    let implicit = ok(d, &["synth", "--spec", "spec.toml"]);
    let explicit = ok(d, &["synth", "--spec", "spec.toml", "--seed", "1"]);
    let other = ok(d, &["synth", "--spec", "spec.toml", "--seed", "2"]);
    assert!(implicit == explicit, "omitted seed differs from --seed 1");
    assert!(implicit != other, "seed has no effect");
}

#[test]
fn experiment_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("spec.toml"), SMALL_SPEC).unwrap();
    ok(d, &["synth", "--spec", "spec.toml", "--out", "cases.csv"]);
    fs::write(
        d.join("plan.toml"),
        "noise = [0, 5]\nreplicates = 50\nk_max = 10\n\n[data]\nkind = \"csv\"\npath = \"cases.csv\"\n",
    )
    .unwrap();
    ok(d, &["experiment", "--plan", "plan.toml", "--seed", "7", "--out", "run1"]);
    ok(d, &["experiment", "--plan", "plan.toml", "--seed", "7", "--out", "run2"]);
    let mut names: Vec<_> = fs::read_dir(d.join("run1")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for name in names {
        assert_eq!(fs::read(d.join("run1").join(&name)).unwrap(), fs::read(d.join("run2").join(&name)).unwrap());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("run1/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn stepwise_fit_on_separated_data_names_the_attribute() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let mut text = String::from("id,label,leak,x\n");
    for i in 0..40 {
        let y = i % 2;
        text.push_str(&format!("c{i},{y},{y},{}\n", (i / 3) % 2));
    }
    fs::write(d.join("t.csv"), &text).unwrap();
    let out = lrcbr(d, &["fit", "--train", "t.csv", "--stepwise"]);
    assert_eq!(out.status.code(), Some(1));
    let diag = stderr_json(&out);
    assert_eq!(diag["error"]["module"], "logistic");
    assert!(diag["error"]["message"].as_str().unwrap().contains("leak"));

    let out = lrcbr(d, &["fit", "--train", "t.csv", "--stepwise", "--exclude-separating"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!model["selected_attributes"].as_array().unwrap().iter().any(|a| a == "leak"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(lrcbr(tmp.path(), &["fit", "--bogus"]).status.code(), Some(2));
    assert_eq!(lrcbr(tmp.path(), &[]).status.code(), Some(2));
    assert_eq!(lrcbr(tmp.path(), &["split", "--data", "x.csv"]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lrcbr(tmp.path(), &["fit", "--train", "nope.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["module"], "dataset");
}

#[test]
fn every_subcommand_has_help() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["synth", "split", "fit", "weights", "tune-k", "predict", "eval", "experiment"] {
        let help = ok(tmp.path(), &[sub, "--help"]);
        assert!(help.contains("--seed") && help.contains("--out") && help.contains("--format"), "{sub}");
    }
}

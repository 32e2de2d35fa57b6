//! `lrcbr` command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain or input error, 2 on a usage
//! error. Errors are reported on stderr as a human-readable line followed
//! by one JSON object.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrcbr::experiment::VariantId;

/// Seed used when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "lrcbr", version, about = "Case retrieval weighted by logistic regression")]
pub struct Cli {
    /// Master seed for every random draw [default: 1; `experiment` falls back to the plan's seed]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for `split` and `experiment`); stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for reports
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic case base as CSV
    Synth(SynthArgs),
    /// Split a case base into training, setting and evaluation parts and test their homogeneity
    Split(SplitArgs),
    /// Fit a logistic model on a labeled case base
    Fit(FitArgs),
    /// Derive attribute and case weights for a variant
    Weights(WeightsArgs),
    /// Tune K on a setting case base
    TuneK(TuneKArgs),
    /// Score query cases
    Predict(PredictArgs),
    /// Bootstrap AUC of a scores file
    Eval(EvalArgs),
    /// Run an experiment plan and write its reports
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML synthetic spec (its `seed` is replaced by --seed); the paper-scale preset when omitted
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Override the number of cases
    #[arg(long)]
    pub cases: Option<usize>,
    /// Random Bernoulli(0.5) attributes appended after generation
    #[arg(long, default_value_t = 0)]
    pub noise: usize,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Labeled case base CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Part sizes as TRAINING,SETTING,EVALUATION [default: equal thirds]
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: Option<lrcbr::dataset::SplitSizes>,
    /// Significance level of the homogeneity test
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Labeled training case base CSV
    #[arg(long)]
    pub train: PathBuf,
    /// Select attributes by bidirectional stepwise AIC
    #[arg(long)]
    pub stepwise: bool,
    /// With --stepwise, drop separating attributes instead of failing
    #[arg(long, requires = "stepwise")]
    pub exclude_separating: bool,
    /// Convergence tolerance on the log-likelihood change
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Newton iteration limit
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VariantArgs {
    /// Logistic model JSON written by `fit`
    #[arg(long)]
    pub model: PathBuf,
    /// Algorithm variant: LR, CBR, CBR+WA, CBR+WP or CBR+WA+WP
    #[arg(long, default_value = "CBR+WA+WP", value_parser = parse_variant)]
    pub variant: VariantId,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Labeled training case base CSV
    #[arg(long)]
    pub train: PathBuf,
    /// Also write case weights as CSV to this file
    #[arg(long)]
    pub case_weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneKArgs {
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Labeled training case base CSV
    #[arg(long)]
    pub train: PathBuf,
    /// Labeled setting case base CSV
    #[arg(long)]
    pub setting: PathBuf,
    /// Largest K tried [default: min(50, 3 floor(sqrt(n)))]
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Query case base CSV (labels optional)
    #[arg(long)]
    pub query: PathBuf,
    /// Labeled training case base CSV (K-NN variants)
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Neighbour count; tuned on --setting when omitted
    #[arg(long)]
    pub k: Option<usize>,
    /// Labeled setting case base CSV used to tune K
    #[arg(long)]
    pub setting: Option<PathBuf>,
    /// Largest K tried when tuning [default: min(50, 3 floor(sqrt(n)))]
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scores CSV with columns case_id,score,label
    #[arg(long)]
    pub scores: PathBuf,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,
    /// Also write the ROC curve as CSV to this file
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Also write the replicate AUCs, in replicate order, to this file
    #[arg(long)]
    pub dump_replicates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML experiment plan
    #[arg(long)]
    pub plan: PathBuf,
}

fn parse_sizes(s: &str) -> Result<lrcbr::dataset::SplitSizes, String> {
    let parts: Vec<usize> =
        s.split(',').map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    match parts[..] {
        [t, s, u] => Ok(lrcbr::dataset::SplitSizes::new(t, s, u)),
        _ => Err("expected three comma-separated sizes".into()),
    }
}

fn parse_variant(s: &str) -> Result<VariantId, String> {
    s.parse().map_err(|e: lrcbr::experiment::ExperimentError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::CliError;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("379, 379,379").unwrap(), lrcbr::dataset::SplitSizes::new(379, 379, 379));
        assert!(parse_sizes("1,2").is_err());
        assert!(parse_sizes("a,b,c").is_err());
    }

    #[test]
    fn variants_parse() {
        assert_eq!(parse_variant("cbr+wa+wp").unwrap(), VariantId::CbrWaWp);
        assert!(parse_variant("knn").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}

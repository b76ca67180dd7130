use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod settings;

/// Gear fault diagnosis: statistical features, decision-tree feature
/// selection, large margin nearest neighbor metric learning and weighted kNN.
#[derive(Parser)]
#[command(name = "gearlmnn", version)]
struct Cli {
    /// key=value file supplying defaults for any tunable flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run on a single thread
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic gearbox vibration windows as CSV
    Synth(SynthArgs),
    /// Compute the thirteen statistical features of every window
    Extract(ExtractArgs),
    /// Grow a gain-ratio decision tree and keep the features it tests
    Select(SelectArgs),
    /// Learn a metric on a labeled feature table
    Train(TrainArgs),
    /// Label feature rows with weighted kNN under a trained metric
    Classify(ClassifyArgs),
    /// Train and test on one seeded random split and write a JSON report
    Evaluate(EvaluateArgs),
    /// Accuracy over a grid of k values and test sizes
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV, one window per row plus a label column
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of classes, the first being healthy [default: 7]
    #[arg(long)]
    classes: Option<usize>,
    /// Windows per class [default: 60]
    #[arg(long)]
    per_class: Option<usize>,
    /// Samples per window [default: 1024]
    #[arg(long)]
    length: Option<usize>,
    /// Impulse amplitude added per severity level [default: 4]
    #[arg(long)]
    severity: Option<f64>,
    /// Standard deviation of the background noise [default: 1]
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Signal file: CSV with one window per row (optional `label` column) or
    /// plain text with one sample per line
    #[arg(long)]
    input: PathBuf,
    /// Output feature CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Labeled feature CSV
    #[arg(long)]
    input: PathBuf,
    /// Rendered decision tree
    #[arg(long)]
    tree: PathBuf,
    /// Selected feature names, one per line
    #[arg(long)]
    subset: PathBuf,
    /// Minimum instances in each child of a split [default: 2]
    #[arg(long)]
    min_leaf: Option<usize>,
}

#[derive(Args, Clone)]
struct TrainingFlags {
    /// Neighbors used for target selection and voting [default: 1]
    #[arg(long)]
    k: Option<usize>,
    /// Weight of the impostor term [default: 0.1]
    #[arg(long)]
    mu: Option<f64>,
    /// Gradient step size [default: 0.01]
    #[arg(long)]
    step: Option<f64>,
    /// Projected gradient iterations [default: 10]
    #[arg(long)]
    iterations: Option<usize>,
    /// Seed for the train/test split [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Standardize features before learning the metric
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    standardize: Option<bool>,
    /// Weight the pull term by 1 instead of (1 − mu)
    #[arg(
        long = "unit-pull-weight",
        visible_alias = "strict-eq16",
        num_args = 0..=1,
        default_missing_value = "true"
    )]
    unit_pull_weight: Option<bool>,
    /// Look for impostors among the k nearest neighbors only
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    knn_restricted_impostors: Option<bool>,
}

#[derive(Args, Clone)]
struct SplitFlags {
    /// Test instances drawn from each class [default: 50]
    #[arg(long)]
    test_per_class: Option<usize>,
    /// Treat the test size as a total over all classes
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    total_split: Option<bool>,
    /// `lmnn` or `identity` (plain Euclidean baseline) [default: lmnn]
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature CSV
    #[arg(long)]
    input: PathBuf,
    /// Restrict to the features listed in this file
    #[arg(long)]
    subset: Option<PathBuf>,
    /// Model file; the training table is written next to it as
    /// `<stem>.train.csv`
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    training: TrainingFlags,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training table [default: `<model stem>.train.csv`]
    #[arg(long)]
    train: Option<PathBuf>,
    /// Feature CSV to label; a `label` column is ignored
    #[arg(long)]
    input: PathBuf,
    /// Predicted labels, one per row; vote weights go to `<stem>.json`
    #[arg(long)]
    out: PathBuf,
    /// Override the model's k
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled feature CSV
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    subset: Option<PathBuf>,
    /// JSON report
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    training: TrainingFlags,
    #[command(flatten)]
    split: SplitFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Labeled feature CSV
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    subset: Option<PathBuf>,
    /// Comma-separated k values [default: 1]
    #[arg(long = "k", value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    /// Test sizes, e.g. `1..59` or `1,5,10` [default: 1..59]
    #[arg(long, value_parser = parse_size_list)]
    test_sizes: Option<SizeList>,
    /// Seeded splits per cell [default: 10]
    #[arg(long)]
    trials: Option<usize>,
    /// Per-trial CSV: k, test_size, trial, accuracy
    #[arg(long)]
    out_trials: PathBuf,
    /// Per-cell CSV: k, test_size, trials, mean and standard deviation
    #[arg(long)]
    out_summary: PathBuf,
    /// Base seed for the derived per-trial split seeds [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    standardize: Option<bool>,
    #[arg(
        long = "unit-pull-weight",
        visible_alias = "strict-eq16",
        num_args = 0..=1,
        default_missing_value = "true"
    )]
    unit_pull_weight: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    knn_restricted_impostors: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    total_split: Option<bool>,
    #[arg(long)]
    metric: Option<String>,
}

/// A parsed `--test-sizes` value; a newtype so clap sees one value, not many.
#[derive(Clone)]
struct SizeList(Vec<usize>);

fn parse_size_list(text: &str) -> Result<SizeList, String> {
    settings::parse_sizes(text).map(SizeList)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if commands::is_usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

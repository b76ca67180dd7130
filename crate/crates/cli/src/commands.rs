use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gearlmnn::eval::{
    evaluate_split, generate_dataset, sweep, MetricSource, SplitSize, SweepConfig, SynthConfig,
};
use gearlmnn::feature_select::{build_tree, select_features, DEFAULT_MIN_LEAF};
use gearlmnn::io::{
    extract_all, read_feature_table, read_signal_file, read_subset, write_feature_csv, write_subset,
};
use gearlmnn::knn::classify_batch;
use gearlmnn::lmnn::{train, ImpostorScan, PullWeight};
use gearlmnn::model::Model;
use gearlmnn::{Dataset, Execution, TrainConfig};
use serde_json::json;

use crate::settings::{parse_sizes, usage, Settings, Usage};
use crate::{
    ClassifyArgs, Cli, Command, EvaluateArgs, ExtractArgs, SelectArgs, SplitFlags, SweepArgs,
    SynthArgs, TrainArgs, TrainingFlags,
};

pub fn is_usage_error(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause.is::<Usage>()
            || matches!(
                cause.downcast_ref::<gearlmnn::Error>(),
                Some(gearlmnn::Error::Parameter(_))
            )
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Synth(a) => synth(a, &settings, exec),
        Command::Extract(a) => extract(a, exec),
        Command::Select(a) => select(a, &settings, exec),
        Command::Train(a) => train_model(a, &settings, exec),
        Command::Classify(a) => classify(a, &settings, exec),
        Command::Evaluate(a) => evaluate(a, &settings, exec),
        Command::Sweep(a) => run_sweep(a, &settings, exec),
    }
}

fn synth(a: SynthArgs, s: &Settings, exec: Execution) -> Result<()> {
    let d = SynthConfig::default();
    let config = SynthConfig {
        seed: s.pick(a.seed, "seed", d.seed)?,
        classes: s.pick(a.classes, "classes", d.classes)?,
        per_class: s.pick(a.per_class, "per-class", d.per_class)?,
        signal_length: s.pick(a.length, "length", d.signal_length)?,
        severity_step: s.pick(a.severity, "severity", d.severity_step)?,
        noise: s.pick(a.noise, "noise", d.noise)?,
        ..d
    };
    let signals = generate_dataset(&config, exec)?;
    signals.save(&a.out)?;
    println!(
        "wrote {} windows to {}",
        signals.signals.len(),
        a.out.display()
    );
    Ok(())
}

fn extract(a: ExtractArgs, exec: Execution) -> Result<()> {
    let set = read_signal_file(&a.input)?;
    let features = extract_all(&set.windows, exec)
        .with_context(|| format!("extracting features from {}", a.input.display()))?;
    let degenerate = features.iter().filter(|f| f.degenerate).count();
    if degenerate > 0 {
        log::warn!("{degenerate} constant windows: kurtosis and skewness set to 0");
    }
    write_feature_csv(&a.out, &features, set.labels.as_deref())?;
    println!(
        "wrote {} feature rows to {}",
        features.len(),
        a.out.display()
    );
    Ok(())
}

fn load_dataset(input: &Path, subset: Option<&Path>) -> Result<Dataset> {
    let data = Dataset::read_csv(input, None)?;
    match subset {
        Some(path) => {
            let names = read_subset(path)?;
            data.select_columns(&names)
                .with_context(|| format!("applying feature subset {}", path.display()))
        }
        None => Ok(data),
    }
}

fn select(a: SelectArgs, s: &Settings, exec: Execution) -> Result<()> {
    let min_leaf = s.pick(a.min_leaf, "min-leaf", DEFAULT_MIN_LEAF)?;
    if min_leaf == 0 {
        return Err(usage("--min-leaf must be at least 1"));
    }
    let data = load_dataset(&a.input, None)?;
    let tree = build_tree(&data, min_leaf, exec)?;
    let selected = select_features(&tree);
    if selected.is_empty() {
        return Err(anyhow::anyhow!(
            "the tree is a single leaf; no feature separates the classes in {}",
            a.input.display()
        ));
    }
    fs::write(&a.tree, tree.render()).with_context(|| format!("writing {}", a.tree.display()))?;
    write_subset(&a.subset, &selected)?;
    println!(
        "selected {} of {} features: {}",
        selected.len(),
        data.dim(),
        selected.join(", ")
    );
    Ok(())
}

fn train_config(f: &TrainingFlags, s: &Settings) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let unit_pull = s.pick(f.unit_pull_weight, "unit-pull-weight", false)?;
    let restricted = s.pick(
        f.knn_restricted_impostors,
        "knn-restricted-impostors",
        false,
    )?;
    let config = TrainConfig {
        k: s.pick(f.k, "k", d.k)?,
        mu: s.pick(f.mu, "mu", d.mu)?,
        step: s.pick(f.step, "step", d.step)?,
        max_iterations: s.pick(f.iterations, "iterations", d.max_iterations)?,
        seed: s.pick(f.seed, "seed", d.seed)?,
        standardize: s.pick(f.standardize, "standardize", d.standardize)?,
        pull_weight: if unit_pull {
            PullWeight::Unit
        } else {
            PullWeight::Complement
        },
        impostor_scan: if restricted {
            ImpostorScan::NearestK
        } else {
            ImpostorScan::AllDifferentLabel
        },
    };
    config.validate()?;
    Ok(config)
}

fn parse_metric(text: &str) -> Result<MetricSource, String> {
    match text {
        "lmnn" => Ok(MetricSource::Lmnn),
        "identity" => Ok(MetricSource::Identity),
        other => Err(format!(
            "unknown metric `{other}`, expected lmnn or identity"
        )),
    }
}

fn metric_source(cli: Option<&str>, s: &Settings) -> Result<MetricSource> {
    let cli = cli.map(parse_metric).transpose().map_err(usage)?;
    s.pick_with(cli, "metric", MetricSource::Lmnn, parse_metric)
}

fn sidecar(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}

fn train_model(a: TrainArgs, s: &Settings, exec: Execution) -> Result<()> {
    let config = train_config(&a.training, s)?;
    let data = load_dataset(&a.input, a.subset.as_deref())?;
    let metric = train(&data, &config, exec)?;
    let model = Model {
        metric,
        class_names: data.class_names().to_vec(),
        config,
    };
    model.save(&a.out)?;
    let table = sidecar(&a.out, "train.csv");
    data.write_csv(&table)?;
    println!(
        "wrote model {} and training table {}",
        a.out.display(),
        table.display()
    );
    Ok(())
}

fn classify(a: ClassifyArgs, s: &Settings, exec: Execution) -> Result<()> {
    let model = Model::load(&a.model)?;
    let train_path = a.train.unwrap_or_else(|| sidecar(&a.model, "train.csv"));
    let train_set = Dataset::read_csv(&train_path, Some(&model.class_names))?
        .select_columns(model.metric.feature_names())
        .with_context(|| format!("matching {} to the model", train_path.display()))?;
    let k = s.pick(a.k, "k", model.config.k)?;
    if k == 0 || k > train_set.len() {
        return Err(usage(format!(
            "k must lie in 1..={}, got {k}",
            train_set.len()
        )));
    }
    let queries = read_feature_table(&a.input)?
        .columns(model.metric.feature_names())
        .with_context(|| format!("reading queries from {}", a.input.display()))?;
    let predictions = classify_batch(&model.metric, &train_set, &queries, k, exec)?;

    let classes = train_set.class_names();
    let mut labels = String::new();
    for p in &predictions {
        labels.push_str(&classes[p.label]);
        labels.push('\n');
    }
    fs::write(&a.out, labels).with_context(|| format!("writing {}", a.out.display()))?;
    let details = json!({
        "classes": classes,
        "k": k,
        "predictions": predictions.iter().map(|p| json!({
            "label": classes[p.label],
            "weights": p.weights,
            "neighbors": p.neighbors,
            "exact_match": p.exact_match,
        })).collect::<Vec<_>>(),
    });
    let json_path = sidecar(&a.out, "json");
    fs::write(&json_path, serde_json::to_string_pretty(&details)? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    println!(
        "labeled {} rows into {}",
        predictions.len(),
        a.out.display()
    );
    Ok(())
}

fn split_size(f: &SplitFlags, s: &Settings) -> Result<SplitSize> {
    let n = s.pick(f.test_per_class, "test-per-class", 50)?;
    if n == 0 {
        return Err(usage(
            "--test-per-class must be at least 1: the test set would be empty",
        ));
    }
    Ok(if s.pick(f.total_split, "total-split", false)? {
        SplitSize::Total(n)
    } else {
        SplitSize::PerClass(n)
    })
}

fn evaluate(a: EvaluateArgs, s: &Settings, exec: Execution) -> Result<()> {
    let config = train_config(&a.training, s)?;
    let size = split_size(&a.split, s)?;
    let source = metric_source(a.split.metric.as_deref(), s)?;
    let data = load_dataset(&a.input, a.subset.as_deref())?;
    let report = evaluate_split(&data, size, &config, source, exec)?;
    fs::write(&a.out, report.to_json() + "\n")
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "accuracy {:.4} ({} of {})",
        report.accuracy,
        report.confusion.correct(),
        report.confusion.total()
    );
    Ok(())
}

fn run_sweep(a: SweepArgs, s: &Settings, exec: Execution) -> Result<()> {
    let parse_ks = |text: &str| -> Result<Vec<usize>, String> {
        text.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| format!("`{v}` is not a k value"))
            })
            .collect()
    };
    let k_values = s.pick_with(a.k_values, "k", vec![1], parse_ks)?;
    let test_sizes = s.pick_with(
        a.test_sizes.map(|l| l.0),
        "test-sizes",
        (1..=59).collect(),
        parse_sizes,
    )?;
    let trials = s.pick(a.trials, "trials", 10)?;
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(usage("--k needs values of at least 1"));
    }
    if test_sizes.contains(&0) {
        return Err(usage(
            "--test-sizes must be at least 1: the test set would be empty",
        ));
    }
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let flags = TrainingFlags {
        k: Some(k_values[0]),
        mu: a.mu,
        step: a.step,
        iterations: a.iterations,
        seed: None,
        standardize: a.standardize,
        unit_pull_weight: a.unit_pull_weight,
        knn_restricted_impostors: a.knn_restricted_impostors,
    };
    let train_config = train_config(&flags, s)?;
    let config = SweepConfig {
        k_values,
        test_sizes,
        trials,
        seed: s.pick(a.seed, "seed", 0)?,
        per_class: !s.pick(a.total_split, "total-split", false)?,
        train: train_config,
        source: metric_source(a.metric.as_deref(), s)?,
    };
    let data = load_dataset(&a.input, a.subset.as_deref())?;
    let result = sweep(&data, &config, exec)?;
    result.save(&a.out_trials, &a.out_summary)?;
    if let Some(best) = result.cells.iter().max_by(|x, y| x.mean.total_cmp(&y.mean)) {
        println!(
            "{} cells; best mean accuracy {:.4} at k = {}, test size {}",
            result.cells.len(),
            best.mean,
            best.k,
            best.test_size
        );
    }
    Ok(())
}

//! End-to-end run on synthetic gearbox windows: features, tree selection,
//! LMNN training and weighted kNN over repeated random splits.
//!
//! cargo run --release -p gearlmnn --example pipeline -- [seed] [splits] [severity] [noise]

use gearlmnn::eval::{evaluate_split, generate_dataset, MetricSource, SplitSize, SynthConfig};
use gearlmnn::feature_select::{build_tree, select_features, DEFAULT_MIN_LEAF};
use gearlmnn::io::{extract_all, feature_dataset};
use gearlmnn::{Execution, TrainConfig};

fn main() -> gearlmnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let splits: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let defaults = SynthConfig::default();
    let severity_step = args
        .next()
        .and_then(|a| a.parse().ok())
        .unwrap_or(defaults.severity_step);
    let noise = args
        .next()
        .and_then(|a| a.parse().ok())
        .unwrap_or(defaults.noise);
    let exec = Execution::Parallel;

    let synth = generate_dataset(
        &SynthConfig {
            seed,
            severity_step,
            noise,
            ..defaults
        },
        exec,
    )?;
    let features = extract_all(&synth.signals, exec)?;
    let dataset = feature_dataset(&features, &synth.labels_as_names())?;
    let tree = build_tree(&dataset, DEFAULT_MIN_LEAF, exec)?;
    let selected = select_features(&tree);
    println!(
        "selected {} features: {}",
        selected.len(),
        selected.join(", ")
    );
    let dataset = dataset.select_columns(&selected)?;

    let mut lmnn = 0.0;
    let mut euclid = 0.0;
    for split in 0..splits {
        let config = TrainConfig {
            seed: seed * 1000 + split,
            ..TrainConfig::default()
        };
        let a = evaluate_split(
            &dataset,
            SplitSize::PerClass(50),
            &config,
            MetricSource::Lmnn,
            exec,
        )?;
        let b = evaluate_split(
            &dataset,
            SplitSize::PerClass(50),
            &config,
            MetricSource::Identity,
            exec,
        )?;
        println!(
            "split {split}: lmnn {:.4}  identity {:.4}",
            a.accuracy, b.accuracy
        );
        lmnn += a.accuracy / splits as f64;
        euclid += b.accuracy / splits as f64;
    }
    println!("mean accuracy: lmnn {lmnn:.4}  identity {euclid:.4}");
    Ok(())
}

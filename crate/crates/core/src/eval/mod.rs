//! Random sub-sampling evaluation: seeded splits, confusion matrices,
//! accuracy, and (k, test size) sweeps.

mod synth;

use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::knn::classify;
use crate::lmnn::{train, Metric, TrainConfig};

pub use synth::{generate_dataset, SynthConfig, SyntheticSignals};

pub const CONFUSION_ORIENTATION: &str = "rows=actual,columns=predicted";

/// Per-(actual, predicted) counts. Row = actual class, column = predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            rows: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(labels: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() != labels.len() || rows.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::Shape {
                expected: labels.len(),
                got: rows.len(),
            });
        }
        Ok(ConfusionMatrix { labels, rows })
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.rows[actual][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.rows.len()).map(|i| self.rows[i][i]).sum()
    }

    /// trace / total, or 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    /// Per-class test counts (row sums).
    pub fn actual_counts(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    /// Element-wise sum with another matrix over the same labels.
    pub fn merge(&self, other: &ConfusionMatrix) -> Result<ConfusionMatrix> {
        if self.labels != other.labels {
            return Err(Error::Dataset(
                "confusion matrices have different labels".into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(ConfusionMatrix {
            labels: self.labels.clone(),
            rows,
        })
    }
}

/// How the test portion of a split is sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitSize {
    /// This many test instances from every class.
    PerClass(usize),
    /// This many test instances drawn from the whole dataset.
    Total(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricSource {
    Lmnn,
    Identity,
}

/// Splits `dataset` into (train, test) with a seeded generator. Both parts
/// keep the original instance order.
pub fn random_subsample_split(
    dataset: &Dataset,
    size: SplitSize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; dataset.len()];
    match size {
        SplitSize::PerClass(per_class) => {
            for (class, &count) in dataset.class_counts().iter().enumerate() {
                if count == 0 {
                    continue;
                }
                if count <= per_class {
                    return Err(Error::InsufficientClassSize {
                        class: dataset.class_names()[class].clone(),
                        available: count,
                        requested: per_class,
                    });
                }
                let members: Vec<usize> = (0..dataset.len())
                    .filter(|&i| dataset.instances()[i].y == class)
                    .collect();
                for pick in index::sample(&mut rng, members.len(), per_class) {
                    in_test[members[pick]] = true;
                }
            }
        }
        SplitSize::Total(total) => {
            if total >= dataset.len() {
                return Err(Error::Parameter(format!(
                    "test size {total} leaves no training data out of {}",
                    dataset.len()
                )));
            }
            for pick in index::sample(&mut rng, dataset.len(), total) {
                in_test[pick] = true;
            }
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| in_test[i]);
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub k: usize,
    pub mu: f64,
    pub step: f64,
    pub iterations: usize,
    pub standardize: bool,
    pub pull_weight: crate::lmnn::PullWeight,
    pub impostor_scan: crate::lmnn::ImpostorScan,
    pub metric_source: MetricSource,
    pub features: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    pub split: Option<SplitSize>,
    pub confusion_orientation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub config: ReportConfig,
    pub seed: u64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn check_compatible(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.feature_names() != test.feature_names() {
        return Err(Error::Dataset("train and test feature names differ".into()));
    }
    if train.class_names() != test.class_names() {
        return Err(Error::Dataset("train and test class sets differ".into()));
    }
    Ok(())
}

/// Trains a metric on `train` (or uses the identity), classifies every
/// instance of `test`, and tallies the confusion matrix.
pub fn evaluate(
    train_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
    source: MetricSource,
    exec: Execution,
) -> Result<EvalReport> {
    check_compatible(train_set, test_set)?;
    if test_set.is_empty() {
        return Err(Error::Parameter("test set is empty".into()));
    }
    config.validate()?;
    let metric = match source {
        MetricSource::Lmnn => train(train_set, config, exec)?,
        MetricSource::Identity => Metric::identity(train_set.feature_names().to_vec()),
    };
    evaluate_with_metric(&metric, train_set, test_set, config, source, exec)
}

pub fn evaluate_with_metric(
    metric: &Metric,
    train_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
    source: MetricSource,
    exec: Execution,
) -> Result<EvalReport> {
    check_compatible(train_set, test_set)?;
    let predictions = exec
        .map_slice(test_set.instances(), |inst| {
            classify(metric, train_set, &inst.x, config.k).map(|p| p.label)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = ConfusionMatrix::new(train_set.class_names().to_vec());
    for (inst, predicted) in test_set.instances().iter().zip(predictions) {
        confusion.record(inst.y, predicted);
    }
    Ok(EvalReport {
        accuracy: confusion.accuracy(),
        confusion,
        config: ReportConfig {
            k: config.k,
            mu: config.mu,
            step: config.step,
            iterations: config.max_iterations,
            standardize: config.standardize,
            pull_weight: config.pull_weight,
            impostor_scan: config.impostor_scan,
            metric_source: source,
            features: train_set.feature_names().to_vec(),
            train_size: train_set.len(),
            test_size: test_set.len(),
            split: None,
            confusion_orientation: CONFUSION_ORIENTATION,
        },
        seed: config.seed,
    })
}

/// Splits with `config.seed`, then [`evaluate`]s.
pub fn evaluate_split(
    dataset: &Dataset,
    size: SplitSize,
    config: &TrainConfig,
    source: MetricSource,
    exec: Execution,
) -> Result<EvalReport> {
    let (train_set, test_set) = random_subsample_split(dataset, size, config.seed)?;
    let mut report = evaluate(&train_set, &test_set, config, source, exec)?;
    report.config.split = Some(size);
    Ok(report)
}

/// SplitMix64 finaliser, used to derive independent per-cell seeds.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub k: usize,
    pub test_size: usize,
    pub trial: usize,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub k: usize,
    pub test_size: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k_values: Vec<usize>,
    pub test_sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub per_class: bool,
    pub train: TrainConfig,
    pub source: MetricSource,
}

/// Evaluates every (k, test size) cell over `trials` seeded splits. The split
/// seed depends on (test size, trial) only, so all k values of a column see
/// the same splits.
pub fn sweep(dataset: &Dataset, config: &SweepConfig, exec: Execution) -> Result<SweepResult> {
    if config.k_values.is_empty() || config.test_sizes.is_empty() {
        return Err(Error::Parameter("sweep grid is empty".into()));
    }
    if config.trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for &k in &config.k_values {
        for &test_size in &config.test_sizes {
            for trial in 0..config.trials {
                jobs.push((k, test_size, trial));
            }
        }
    }
    let entries = exec
        .map_slice(&jobs, |&(k, test_size, trial)| {
            let seed = derive_seed(config.seed, test_size as u64, trial as u64);
            let size = if config.per_class {
                SplitSize::PerClass(test_size)
            } else {
                SplitSize::Total(test_size)
            };
            let train_config = TrainConfig {
                k,
                seed,
                ..config.train.clone()
            };
            evaluate_split(dataset, size, &train_config, config.source, exec).map(|r| SweepEntry {
                k,
                test_size,
                trial,
                seed,
                accuracy: r.accuracy,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let cells = entries
        .chunks(config.trials)
        .map(|chunk| {
            let n = chunk.len() as f64;
            let mean = chunk.iter().map(|e| e.accuracy).sum::<f64>() / n;
            let std = if chunk.len() > 1 {
                (chunk
                    .iter()
                    .map(|e| (e.accuracy - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            SweepCell {
                k: chunk[0].k,
                test_size: chunk[0].test_size,
                trials: chunk.len(),
                mean,
                std,
            }
        })
        .collect();
    Ok(SweepResult { entries, cells })
}

impl SweepResult {
    /// `k,test_size,trial,accuracy` rows.
    pub fn write_trials_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "test_size", "trial", "accuracy"])?;
        for e in &self.entries {
            w.write_record(&[
                e.k.to_string(),
                e.test_size.to_string(),
                e.trial.to_string(),
                e.accuracy.to_string(),
            ])?;
        }
        w.flush()
    }

    /// `k,test_size,trials,mean_accuracy,std_accuracy` rows.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "test_size", "trials", "mean_accuracy", "std_accuracy"])?;
        for c in &self.cells {
            w.write_record(&[
                c.k.to_string(),
                c.test_size.to_string(),
                c.trials.to_string(),
                c.mean.to_string(),
                c.std.to_string(),
            ])?;
        }
        w.flush()
    }

    pub fn save(&self, trials_path: &Path, summary_path: &Path) -> Result<()> {
        let open = |p: &Path| std::fs::File::create(p).map_err(|e| Error::io(p, e));
        self.write_trials_csv(open(trials_path)?)
            .map_err(|e| Error::io(trials_path, e))?;
        self.write_summary_csv(open(summary_path)?)
            .map_err(|e| Error::io(summary_path, e))
    }
}

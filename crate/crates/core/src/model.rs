//! Text model file for a learned metric.
//!
//! ```text
//! gearlmnn-metric 1
//! <feature names, comma separated>
//! <class labels, comma separated>
//! <dimension n>
//! <n rows of n comma-separated values>
//! key=value training configuration lines
//! ```
//!
//! Values are written with shortest round-trip formatting, so reading a
//! model back yields the identical matrix.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lmnn::{ImpostorScan, Metric, PullWeight, TrainConfig};

pub const FORMAT_VERSION: &str = "gearlmnn-metric 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub metric: Metric,
    pub class_names: Vec<String>,
    pub config: TrainConfig,
}

fn check_names(kind: &str, names: &[String]) -> Result<()> {
    for n in names {
        if n.is_empty() || n.contains(',') || n.contains('\n') {
            return Err(Error::Parameter(format!(
                "{kind} name `{n}` cannot be stored in a model file"
            )));
        }
    }
    Ok(())
}

fn pull_weight_str(p: PullWeight) -> &'static str {
    match p {
        PullWeight::Complement => "complement",
        PullWeight::Unit => "unit",
    }
}

fn scan_str(s: ImpostorScan) -> &'static str {
    match s {
        ImpostorScan::AllDifferentLabel => "all",
        ImpostorScan::NearestK => "nearest-k",
    }
}

impl Model {
    pub fn to_text(&self) -> Result<String> {
        check_names("feature", self.metric.feature_names())?;
        check_names("class", &self.class_names)?;
        let m = self.metric.matrix();
        let n = self.metric.dim();
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_VERSION}");
        let _ = writeln!(out, "{}", self.metric.feature_names().join(","));
        let _ = writeln!(out, "{}", self.class_names.join(","));
        let _ = writeln!(out, "{n}");
        for r in 0..n {
            let row: Vec<String> = (0..n).map(|c| m[(r, c)].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        let c = &self.config;
        let _ = writeln!(out, "k={}", c.k);
        let _ = writeln!(out, "mu={}", c.mu);
        let _ = writeln!(out, "step={}", c.step);
        let _ = writeln!(out, "iterations={}", c.max_iterations);
        let _ = writeln!(out, "seed={}", c.seed);
        let _ = writeln!(out, "standardize={}", c.standardize);
        let _ = writeln!(out, "pull_weight={}", pull_weight_str(c.pull_weight));
        let _ = writeln!(out, "impostor_scan={}", scan_str(c.impostor_scan));
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::parse(&text).map_err(|msg| Error::parse(path, msg))
    }

    pub fn parse(text: &str) -> std::result::Result<Model, String> {
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| format!("missing {what}"));
        let version = next("format version")?;
        if version.trim() != FORMAT_VERSION {
            return Err(format!("unsupported format `{version}`"));
        }
        let split =
            |l: &str| -> Vec<String> { l.split(',').map(|s| s.trim().to_string()).collect() };
        let features = split(next("feature names")?);
        let classes = split(next("class labels")?);
        let n: usize = next("dimension")?
            .trim()
            .parse()
            .map_err(|_| "dimension is not an integer".to_string())?;
        if n != features.len() {
            return Err(format!(
                "dimension {n} does not match {} feature names",
                features.len()
            ));
        }
        let mut values = Vec::with_capacity(n * n);
        for r in 0..n {
            let row = next("matrix row")?;
            let parsed: Vec<f64> = row
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| format!("matrix row {r} is malformed"))?;
            if parsed.len() != n {
                return Err(format!("matrix row {r} has {} values", parsed.len()));
            }
            values.extend(parsed);
        }
        let mut config = TrainConfig::default();
        for line in lines.map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line `{line}` is not key=value"))?;
            let bad = || format!("bad value for `{key}`: `{value}`");
            match key.trim() {
                "k" => config.k = value.parse().map_err(|_| bad())?,
                "mu" => config.mu = value.parse().map_err(|_| bad())?,
                "step" => config.step = value.parse().map_err(|_| bad())?,
                "iterations" => config.max_iterations = value.parse().map_err(|_| bad())?,
                "seed" => config.seed = value.parse().map_err(|_| bad())?,
                "standardize" => config.standardize = value.parse().map_err(|_| bad())?,
                "pull_weight" => {
                    config.pull_weight = match value {
                        "complement" => PullWeight::Complement,
                        "unit" => PullWeight::Unit,
                        _ => return Err(bad()),
                    }
                }
                "impostor_scan" => {
                    config.impostor_scan = match value {
                        "all" => ImpostorScan::AllDifferentLabel,
                        "nearest-k" => ImpostorScan::NearestK,
                        _ => return Err(bad()),
                    }
                }
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
        let metric = Metric::new(DMatrix::from_row_slice(n, n, &values), features)
            .map_err(|e| e.to_string())?;
        Ok(Model {
            metric,
            class_names: classes,
            config,
        })
    }
}

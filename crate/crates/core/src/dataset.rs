//! Labeled feature datasets and their CSV form.
//!
//! The CSV layout is a header row of feature names followed by a final
//! `label` column; each subsequent row is one instance.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "label";

/// A feature vector paired with the index of its class in the owning
/// dataset's `class_names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub x: Vec<f64>,
    pub y: usize,
}

impl LabeledInstance {
    pub fn new(x: Vec<f64>, y: usize) -> Self {
        LabeledInstance { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    class_names: Vec<String>,
    instances: Vec<LabeledInstance>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        class_names: Vec<String>,
        instances: Vec<LabeledInstance>,
    ) -> Result<Self> {
        check_unique("feature", &feature_names)?;
        check_unique("class", &class_names)?;
        for (row, inst) in instances.iter().enumerate() {
            if inst.x.len() != feature_names.len() {
                return Err(Error::Dataset(format!(
                    "instance {row} has {} values, expected {}",
                    inst.x.len(),
                    feature_names.len()
                )));
            }
            if inst.y >= class_names.len() {
                return Err(Error::Dataset(format!(
                    "instance {row} has class index {} of {}",
                    inst.y,
                    class_names.len()
                )));
            }
            if let Some(col) = inst.x.iter().position(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!(
                    "instance {row} has a non-finite value in column `{}`",
                    feature_names[col]
                )));
            }
        }
        Ok(Dataset {
            feature_names,
            class_names,
            instances,
        })
    }

    /// Builds a dataset from rows with string labels. Class names are taken in
    /// order of first appearance.
    pub fn from_labeled_rows(
        feature_names: Vec<String>,
        rows: Vec<(Vec<f64>, String)>,
    ) -> Result<Self> {
        let mut class_names: Vec<String> = Vec::new();
        let mut instances = Vec::with_capacity(rows.len());
        for (x, label) in rows {
            let y = match class_names.iter().position(|c| *c == label) {
                Some(y) => y,
                None => {
                    class_names.push(label);
                    class_names.len() - 1
                }
            };
            instances.push(LabeledInstance { x, y });
        }
        Dataset::new(feature_names, class_names, instances)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Instance count per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for inst in &self.instances {
            counts[inst.y] += 1;
        }
        counts
    }

    /// Number of classes that actually have instances.
    pub fn distinct_labels(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Dataset restricted to the listed instance indices, same schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Dataset restricted to the named feature columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_index(n.as_ref())
                    .ok_or_else(|| Error::Dataset(format!("unknown feature `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        let instances = self
            .instances
            .iter()
            .map(|inst| LabeledInstance {
                x: cols.iter().map(|&c| inst.x[c]).collect(),
                y: inst.y,
            })
            .collect();
        Dataset::new(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            self.class_names.clone(),
            instances,
        )
    }

    /// Appends instances of another dataset with the same schema.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_names != other.feature_names || self.class_names != other.class_names {
            return Err(Error::Dataset("schemas differ".into()));
        }
        let mut instances = self.instances.clone();
        instances.extend(other.instances.iter().cloned());
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            instances,
        })
    }

    /// Reads a dataset CSV. Class names are ordered by first appearance unless
    /// `class_order` is given, in which case every label must belong to it.
    pub fn read_csv(path: &Path, class_order: Option<&[String]>) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let label_col = header
            .iter()
            .position(|h| h == LABEL_COLUMN)
            .ok_or_else(|| Error::parse(path, "missing `label` column"))?;
        if label_col + 1 != header.len() {
            return Err(Error::parse(path, "`label` must be the final column"));
        }
        let feature_names: Vec<String> =
            header.iter().take(label_col).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            let x = record
                .iter()
                .take(label_col)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        Error::parse(path, format!("row {}: `{v}` is not a number", line + 2))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push((x, record[label_col].to_string()));
        }
        match class_order {
            None => Dataset::from_labeled_rows(feature_names, rows),
            Some(order) => {
                let index: BTreeMap<&str, usize> = order
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.as_str(), i))
                    .collect();
                let instances = rows
                    .into_iter()
                    .map(|(x, label)| {
                        index
                            .get(label.as_str())
                            .map(|&y| LabeledInstance { x, y })
                            .ok_or_else(|| Error::parse(path, format!("unknown class `{label}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Dataset::new(feature_names, order.to_vec(), instances)
            }
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = self.feature_names.clone();
        header.push(LABEL_COLUMN.to_string());
        writer
            .write_record(&header)
            .map_err(|e| Error::csv(path, e))?;
        for inst in &self.instances {
            let mut row: Vec<String> = inst.x.iter().map(|v| v.to_string()).collect();
            row.push(self.class_names[inst.y].clone());
            writer.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(Error::Dataset(format!("duplicate {kind} name `{name}`")));
        }
    }
    Ok(())
}

/// Per-feature mean and standard deviation estimated on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fits on `instances`. Constant features get scale 1.
    pub fn fit(instances: &[LabeledInstance]) -> Standardizer {
        let dim = instances.first().map_or(0, |i| i.x.len());
        let n = instances.len() as f64;
        let mut mean = vec![0.0; dim];
        for inst in instances {
            for (m, v) in mean.iter_mut().zip(&inst.x) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for inst in instances {
            for ((s, v), m) in var.iter_mut().zip(&inst.x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = (n - 1.0).max(1.0);
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / denom).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

//! Signal files, feature tables and feature-subset files.

use std::fs;
use std::path::Path;

use crate::dataset::{Dataset, LABEL_COLUMN};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::signal_stats::{extract_features, feature_names, FeatureVector};

/// Windows read from a signal file, with labels when the file has a `label`
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub windows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

/// Reads either plain text with one sample per line (a single window) or CSV
/// with one window per row. A CSV header is detected by a non-numeric first
/// row; a header column named `label` holds class labels.
pub fn read_signal_file(path: &Path) -> Result<SignalSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::parse(path, "file is empty"));
    }
    let single_column = lines.iter().all(|l| !l.contains(','));
    if single_column && lines.iter().all(|l| l.parse::<f64>().is_ok()) {
        let window = lines.iter().map(|l| l.parse::<f64>().unwrap()).collect();
        return Ok(SignalSet {
            windows: vec![window],
            labels: None,
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| Error::csv(path, e))?,
        None => return Err(Error::parse(path, "file is empty")),
    };
    let is_header = first.iter().any(|f| f.parse::<f64>().is_err());
    let label_col = if is_header {
        first.iter().position(|f| f == LABEL_COLUMN)
    } else {
        None
    };
    let mut windows = Vec::new();
    let mut labels = Vec::new();
    let mut push_row = |record: &csv::StringRecord, row: usize| -> Result<()> {
        let mut window = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_col {
                labels.push(field.to_string());
                continue;
            }
            window.push(field.parse::<f64>().map_err(|_| {
                Error::parse(path, format!("row {row}: `{field}` is not a number"))
            })?);
        }
        windows.push(window);
        Ok(())
    };
    if !is_header {
        push_row(&first, 1)?;
    }
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        push_row(&record, i + 2)?;
    }
    Ok(SignalSet {
        windows,
        labels: label_col.map(|_| labels),
    })
}

/// Extracts features from every window, in order.
pub fn extract_all(windows: &[Vec<f64>], exec: Execution) -> Result<Vec<FeatureVector>> {
    exec.map_slice(windows, |w| extract_features(w))
        .into_iter()
        .collect()
}

/// Writes a feature table: canonical feature names, plus a final `label`
/// column when labels are given.
pub fn write_feature_csv(
    path: &Path,
    features: &[FeatureVector],
    labels: Option<&[String]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = feature_names();
    if labels.is_some() {
        header.push(LABEL_COLUMN.to_string());
    }
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (row, fv) in features.iter().enumerate() {
        let mut record: Vec<String> = fv.values().iter().map(|v| v.to_string()).collect();
        if let Some(labels) = labels {
            record.push(labels[row].clone());
        }
        w.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Builds a labeled dataset from feature vectors with string labels.
pub fn feature_dataset(features: &[FeatureVector], labels: &[String]) -> Result<Dataset> {
    if features.len() != labels.len() {
        return Err(Error::Shape {
            expected: features.len(),
            got: labels.len(),
        });
    }
    Dataset::from_labeled_rows(
        feature_names(),
        features
            .iter()
            .zip(labels)
            .map(|(f, l)| (f.values().to_vec(), l.clone()))
            .collect(),
    )
}

/// An unlabeled (or optionally labeled) numeric table, e.g. classifier queries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl FeatureTable {
    /// Rows restricted to `names`, in that order.
    pub fn columns(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::Dataset(format!("query table lacks feature `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect())
    }
}

pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let label_col = header.iter().position(|h| h == LABEL_COLUMN);
    let feature_names = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != label_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let mut row = Vec::new();
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_col {
                labels.push(field.to_string());
            } else {
                row.push(field.parse::<f64>().map_err(|_| {
                    Error::parse(path, format!("row {}: `{field}` is not a number", line + 2))
                })?);
            }
        }
        rows.push(row);
    }
    Ok(FeatureTable {
        feature_names,
        rows,
        labels: label_col.map(|_| labels),
    })
}

/// One feature name per line.
pub fn write_subset(path: &Path, names: &[String]) -> Result<()> {
    let mut text = names.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_subset(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let names: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(Error::parse(path, "feature subset is empty"));
    }
    Ok(names)
}

//! Descriptive statistical features of a signal window.
//!
//! The dispersion and shape statistics follow the spreadsheet conventions
//! (`STDEV`, `VAR`, `KURT`, `SKEW`, `STEYX`): sample (n − 1) normalisation and
//! the bias-corrected excess kurtosis and skewness estimators.

use std::fmt;

use crate::error::{Error, Result};

/// Number of histogram bins used to estimate the mode of continuous data.
pub const MODE_BINS: usize = 64;

/// A window of finite amplitude samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(Vec<f64>);

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_finite(&samples)?;
        Ok(Signal(samples))
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Signal {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The thirteen statistical features, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Mean,
    StandardError,
    Median,
    Mode,
    StandardDeviation,
    SampleVariance,
    Kurtosis,
    Skewness,
    Range,
    Minimum,
    Maximum,
    Sum,
    Count,
}

impl Feature {
    pub const ALL: [Feature; 13] = [
        Feature::Mean,
        Feature::StandardError,
        Feature::Median,
        Feature::Mode,
        Feature::StandardDeviation,
        Feature::SampleVariance,
        Feature::Kurtosis,
        Feature::Skewness,
        Feature::Range,
        Feature::Minimum,
        Feature::Maximum,
        Feature::Sum,
        Feature::Count,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Mean => "mean",
            Feature::StandardError => "standard_error",
            Feature::Median => "median",
            Feature::Mode => "mode",
            Feature::StandardDeviation => "standard_deviation",
            Feature::SampleVariance => "sample_variance",
            Feature::Kurtosis => "kurtosis",
            Feature::Skewness => "skewness",
            Feature::Range => "range",
            Feature::Minimum => "minimum",
            Feature::Maximum => "maximum",
            Feature::Sum => "sum",
            Feature::Count => "count",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical feature names, in column order.
pub fn feature_names() -> Vec<String> {
    Feature::ALL.iter().map(|f| f.name().to_string()).collect()
}

/// Feature values of one window in canonical order.
///
/// `degenerate` is set when the window has zero standard deviation; kurtosis
/// and skewness are then reported as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [f64; 13],
    pub degenerate: bool,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        self.values[feature.index()]
    }

    pub fn values(&self) -> &[f64; 13] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Feature, f64)> + '_ {
        Feature::ALL
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

fn check_finite(samples: &[f64]) -> Result<()> {
    match samples.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn require(samples: &[f64], needed: usize) -> Result<()> {
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    check_finite(samples)
}

fn mean_of(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Σ(x − x̄)², computed in two passes.
fn centered_sum_squares(samples: &[f64], mean: f64) -> f64 {
    samples.iter().map(|x| (x - mean) * (x - mean)).sum()
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    require(samples, 1)?;
    Ok(mean_of(samples))
}

/// Sample variance with (n − 1) normalisation.
pub fn sample_variance(samples: &[f64]) -> Result<f64> {
    require(samples, 2)?;
    let n = samples.len() as f64;
    Ok(centered_sum_squares(samples, mean_of(samples)) / (n - 1.0))
}

/// Sample standard deviation, the square root of [`sample_variance`].
pub fn standard_deviation(samples: &[f64]) -> Result<f64> {
    sample_variance(samples).map(f64::sqrt)
}

/// Standardised central moment sum Σ((x − x̄)/s)^p, or a degenerate-signal
/// error when s = 0.
fn standardized_power_sum(samples: &[f64], power: i32) -> Result<f64> {
    let m = mean_of(samples);
    let s = standard_deviation(samples)?;
    if s == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    Ok(samples.iter().map(|x| ((x - m) / s).powi(power)).sum())
}

/// Bias-corrected excess kurtosis.
pub fn kurtosis(samples: &[f64]) -> Result<f64> {
    require(samples, 4)?;
    let n = samples.len() as f64;
    let sum4 = standardized_power_sum(samples, 4)?;
    let lead = n * (n + 1.0) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    let tail = 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    Ok(lead * sum4 - tail)
}

/// Bias-corrected skewness, n/((n − 1)(n − 2)) Σ((x − x̄)/s)³.
pub fn skewness(samples: &[f64]) -> Result<f64> {
    require(samples, 3)?;
    let n = samples.len() as f64;
    let sum3 = standardized_power_sum(samples, 3)?;
    Ok(n / ((n - 1.0) * (n - 2.0)) * sum3)
}

/// Standard error of the least-squares regression of the samples on their
/// 0-based index.
pub fn standard_error(samples: &[f64]) -> Result<f64> {
    require(samples, 3)?;
    let n = samples.len();
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = mean_of(samples);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (i, &y) in samples.iter().enumerate() {
        let dx = i as f64 - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let residual = (syy - sxy * sxy / sxx).max(0.0);
    Ok((residual / (nf - 2.0)).sqrt())
}

/// Middle order statistic; mean of the two middle values for even n.
pub fn median(samples: &[f64]) -> Result<f64> {
    require(samples, 1)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Centre of the most populated of [`MODE_BINS`] equal-width bins spanning
/// [min, max]. The leftmost bin wins ties; the maximum falls in the last bin.
pub fn mode(samples: &[f64]) -> Result<f64> {
    require(samples, 1)?;
    let (lo, hi) = min_max(samples);
    if hi == lo {
        return Ok(lo);
    }
    let width = (hi - lo) / MODE_BINS as f64;
    let mut counts = [0usize; MODE_BINS];
    for &x in samples {
        let bin = (((x - lo) / width) as usize).min(MODE_BINS - 1);
        counts[bin] += 1;
    }
    let mut best = 0;
    for (bin, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = bin;
        }
    }
    Ok(lo + (best as f64 + 0.5) * width)
}

fn min_max(samples: &[f64]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Computes all thirteen features of a window of at least four samples.
pub fn extract_features(samples: &[f64]) -> Result<FeatureVector> {
    require(samples, 4)?;
    let n = samples.len();
    let (lo, hi) = min_max(samples);
    let sd = standard_deviation(samples)?;
    let degenerate = sd == 0.0;
    let (kurt, skew) = if degenerate {
        (0.0, 0.0)
    } else {
        (kurtosis(samples)?, skewness(samples)?)
    };
    let values = [
        mean_of(samples),
        standard_error(samples)?,
        median(samples)?,
        mode(samples)?,
        sd,
        sample_variance(samples)?,
        kurt,
        skew,
        hi - lo,
        lo,
        hi,
        samples.iter().sum(),
        n as f64,
    ];
    Ok(FeatureVector { values, degenerate })
}

//! Synthetic gearbox vibration windows.
//!
//! Class 0 is a healthy gearbox: Gaussian noise only. Class `c > 0` adds a
//! periodic train of decaying ringing impulses (one per tooth-mesh period)
//! whose amplitude is `c · severity_step`, so spikiness grows with fault
//! severity.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::derive_seed;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub signal_length: usize,
    pub severity_step: f64,
    pub noise: f64,
    pub seed: u64,
    /// Samples between successive impulses.
    pub impulse_period: usize,
    /// Relative standard deviation of individual impulse amplitudes.
    pub amplitude_jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 7,
            per_class: 60,
            signal_length: 1024,
            severity_step: 4.0,
            noise: 1.0,
            seed: 0,
            impulse_period: 128,
            amplitude_jitter: 0.1,
        }
    }
}

/// Ringing frequency in cycles per sample and decay constant in samples.
const RING_FREQUENCY: f64 = 0.2;
const RING_DECAY: f64 = 4.0;
const RING_LENGTH: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSignals {
    pub signals: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

pub fn class_name(class: usize) -> String {
    if class == 0 {
        "healthy".to_string()
    } else {
        format!("fault_{class}")
    }
}

fn window(config: &SynthConfig, class: usize, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, class as u64, index as u64));
    let n = config.signal_length;
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            config.noise * z
        })
        .collect();
    let amplitude = class as f64 * config.severity_step;
    if amplitude == 0.0 {
        return x;
    }
    let mut t0 = rng.random_range(0..config.impulse_period);
    while t0 < n {
        let jitter: f64 = StandardNormal.sample(&mut rng);
        let a = amplitude * (1.0 + config.amplitude_jitter * jitter);
        for tau in 0..RING_LENGTH.min(n - t0) {
            let t = tau as f64;
            x[t0 + tau] += a
                * (-t / RING_DECAY).exp()
                * (2.0 * std::f64::consts::PI * RING_FREQUENCY * t + std::f64::consts::FRAC_PI_2)
                    .sin();
        }
        t0 += config.impulse_period;
    }
    x
}

/// Generates `classes × per_class` windows, class-major.
pub fn generate_dataset(config: &SynthConfig, exec: Execution) -> Result<SyntheticSignals> {
    if config.classes < 2 {
        return Err(Error::Parameter("need at least 2 classes".into()));
    }
    if config.per_class < 2 {
        return Err(Error::Parameter("need at least 2 windows per class".into()));
    }
    if config.signal_length < 64 {
        return Err(Error::Parameter("signal length must be at least 64".into()));
    }
    if config.impulse_period == 0 {
        return Err(Error::Parameter("impulse period must be positive".into()));
    }
    for (name, v) in [
        ("severity_step", config.severity_step),
        ("noise", config.noise),
        ("amplitude_jitter", config.amplitude_jitter),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Parameter(format!(
                "{name} must be finite and non-negative"
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..config.classes)
        .flat_map(|c| (0..config.per_class).map(move |i| (c, i)))
        .collect();
    let signals = exec.map_slice(&jobs, |&(c, i)| window(config, c, i));
    Ok(SyntheticSignals {
        signals,
        labels: jobs.iter().map(|&(c, _)| c).collect(),
        class_names: (0..config.classes).map(class_name).collect(),
    })
}

impl SyntheticSignals {
    /// One window per row: `s0,…,s{n−1},label`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.signals.first().map_or(0, Vec::len);
        let mut header: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        header.push(crate::dataset::LABEL_COLUMN.to_string());
        w.write_record(&header)?;
        for (signal, &label) in self.signals.iter().zip(&self.labels) {
            let mut row: Vec<String> = signal.iter().map(|v| v.to_string()).collect();
            row.push(self.class_names[label].clone());
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn labels_as_names(&self) -> Vec<String> {
        self.labels
            .iter()
            .map(|&l| self.class_names[l].clone())
            .collect()
    }
}

//! Gear fault diagnosis with learned metrics.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`signal_stats`] turns each vibration or sound window into thirteen
//!    descriptive statistics.
//! 2. [`feature_select`] grows a gain-ratio decision tree and keeps every
//!    feature that appears at an interior node.
//! 3. [`lmnn`] learns a positive semidefinite matrix `M` by projected
//!    gradient descent so that same-class neighbors are close and impostors
//!    sit outside a unit margin.
//! 4. [`knn`] classifies with inverse-distance-weighted votes under `M`.
//!
//! [`eval`] wraps the stages in seeded random sub-sampling experiments and
//! provides a synthetic gearbox signal generator.
//!
//! Data-parallel loops go through [`Execution`]; building without the
//! default `parallel` feature runs everything sequentially.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod feature_select;
pub mod io;
pub mod knn;
pub mod lmnn;
pub mod model;
pub mod signal_stats;

pub use dataset::{Dataset, LabeledInstance};
pub use error::{Error, Result};
pub use exec::Execution;
pub use lmnn::{Metric, TrainConfig};

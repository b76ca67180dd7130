//! Large margin nearest neighbor metric learning.
//!
//! A positive semidefinite matrix `M` is learned so that each instance's
//! target neighbors (same-class, chosen once under the Euclidean metric) are
//! pulled close while differently-labeled impostors are pushed at least one
//! unit of squared distance further away. Training is projected gradient
//! descent onto the PSD cone starting from the identity.

mod metric;
pub mod psd;
mod train;

pub use metric::{outer_difference, squared_distance, Metric, PSD_TOL, SYMMETRY_TOL};
pub use psd::{min_eigenvalue, psd_project, symmetric_eigen, EigenDecomposition};
pub use train::{
    find_active_triples, gradient, hinge_loss, impostor_count, objective, select_target_neighbors,
    train, train_detailed, ActiveTriple, ImpostorScan, IterationRecord, PullWeight,
    TargetNeighborMap, TrainConfig, TrainOutcome,
};

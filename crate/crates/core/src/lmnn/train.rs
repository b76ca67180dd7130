//! Target neighbors, hinge losses, the objective and its gradient, and the
//! projected gradient training loop.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::metric::Metric;
use super::psd::{psd_project, symmetric_eigen};
use crate::dataset::{Dataset, LabeledInstance, Standardizer};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Weight of the pull (target-neighbor distance) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PullWeight {
    /// `(1 − μ)`, making the objective a convex combination of pull and push.
    #[default]
    Complement,
    /// Weight 1 on the pull term, μ only on the hinge term.
    Unit,
}

impl PullWeight {
    pub fn factor(self, mu: f64) -> f64 {
        match self {
            PullWeight::Complement => 1.0 - mu,
            PullWeight::Unit => 1.0,
        }
    }
}

/// Which differently-labeled points are tested as impostors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpostorScan {
    /// Every differently-labeled training point.
    #[default]
    AllDifferentLabel,
    /// Only differently-labeled points among the k nearest neighbors of `i`
    /// under the current metric.
    NearestK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub k: usize,
    pub mu: f64,
    pub step: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub standardize: bool,
    pub pull_weight: PullWeight,
    pub impostor_scan: ImpostorScan,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 1,
            mu: 0.1,
            step: 0.01,
            max_iterations: 10,
            seed: 0,
            standardize: false,
            pull_weight: PullWeight::Complement,
            impostor_scan: ImpostorScan::AllDifferentLabel,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::Parameter(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Parameter(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        Ok(())
    }
}

/// For each training index, its target neighbors in ascending distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetNeighborMap {
    neighbors: Vec<Vec<usize>>,
}

impl TargetNeighborMap {
    pub fn of(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().map(move |&j| (i, j)))
    }

    pub fn pair_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActiveTriple {
    pub i: usize,
    pub j: usize,
    pub l: usize,
}

fn check_instances(train: &[LabeledInstance]) -> Result<usize> {
    let dim = train.first().map_or(0, |t| t.x.len());
    for inst in train {
        if inst.x.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                got: inst.x.len(),
            });
        }
    }
    Ok(dim)
}

fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Picks, for every instance, the `min(k, classmates)` nearest same-class
/// instances under the Euclidean distance. Ties go to the lower index.
pub fn select_target_neighbors(
    train: &[LabeledInstance],
    k: usize,
    exec: Execution,
) -> Result<TargetNeighborMap> {
    check_instances(train)?;
    let neighbors = exec.map_range(train.len(), |i| {
        let mut mates: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .filter(|&(j, t)| j != i && t.y == train[i].y)
            .map(|(j, t)| (euclidean_sq(&train[i].x, &t.x), j))
            .collect();
        if mates.is_empty() {
            log::warn!("instance {i} is the only member of its class; it has no target neighbors");
        }
        mates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        mates.into_iter().take(k).map(|(_, j)| j).collect()
    });
    Ok(TargetNeighborMap { neighbors })
}

/// `max(0, 1 + d²(x_i, x_j) − d²(x_i, x_l))` for a same-class `j` and a
/// differently-labeled `l`.
pub fn hinge_loss(
    metric: &Metric,
    train: &[LabeledInstance],
    i: usize,
    j: usize,
    l: usize,
) -> Result<f64> {
    let n = train.len();
    if i >= n || j >= n || l >= n {
        return Err(Error::InvalidTriple {
            i,
            j,
            l,
            reason: "index out of range",
        });
    }
    if j == i || train[j].y != train[i].y {
        return Err(Error::InvalidTriple {
            i,
            j,
            l,
            reason: "j must be a distinct same-class instance",
        });
    }
    if train[l].y == train[i].y {
        return Err(Error::InvalidTriple {
            i,
            j,
            l,
            reason: "l must carry a different label than i",
        });
    }
    let xi = &train[i].x;
    if xi.len() != metric.dim() {
        return Err(Error::Shape {
            expected: metric.dim(),
            got: xi.len(),
        });
    }
    let dij = metric.distance_unchecked(xi, &train[j].x);
    let dil = metric.distance_unchecked(xi, &train[l].x);
    Ok((1.0 + dij - dil).max(0.0))
}

/// Per-instance pass: pull distance sum, hinge sum and active triples.
struct InstanceTerms {
    pull: f64,
    hinge: f64,
    active: Vec<ActiveTriple>,
}

/// Maps every instance through a factor `L` with `LᵀL = M`, so that
/// `d²_M(a, b) = ‖L a − L b‖²` costs O(dim) per pair.
fn embed(m: &DMatrix<f64>, train: &[LabeledInstance]) -> Result<Vec<Vec<f64>>> {
    let eig = symmetric_eigen(m)?;
    let rows: Vec<Vec<f64>> = (0..eig.values.len())
        .filter(|&c| eig.values[c] > 0.0)
        .map(|c| {
            let s = eig.values[c].sqrt();
            eig.vectors.column(c).iter().map(|v| s * v).collect()
        })
        .collect();
    Ok(train
        .iter()
        .map(|t| {
            rows.iter()
                .map(|r| r.iter().zip(&t.x).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

fn embedded_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn instance_terms(
    points: &[Vec<f64>],
    train: &[LabeledInstance],
    targets: &TargetNeighborMap,
    i: usize,
    scan: ImpostorScan,
    k: usize,
) -> InstanceTerms {
    let yi = train[i].y;
    let dist: Vec<f64> = points
        .iter()
        .map(|p| embedded_distance(&points[i], p))
        .collect();
    let impostors: Vec<usize> = match scan {
        ImpostorScan::AllDifferentLabel => (0..train.len()).filter(|&l| train[l].y != yi).collect(),
        ImpostorScan::NearestK => {
            let mut near: Vec<usize> = (0..train.len()).filter(|&l| l != i).collect();
            near.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            near.truncate(k);
            near.retain(|&l| train[l].y != yi);
            near.sort_unstable();
            near
        }
    };
    let mut terms = InstanceTerms {
        pull: 0.0,
        hinge: 0.0,
        active: Vec::new(),
    };
    for &j in targets.of(i) {
        terms.pull += dist[j];
        for &l in &impostors {
            let h = 1.0 + dist[j] - dist[l];
            if h > 0.0 {
                terms.hinge += h;
                terms.active.push(ActiveTriple { i, j, l });
            }
        }
    }
    terms
}

fn check_targets(train: &[LabeledInstance], targets: &TargetNeighborMap) -> Result<()> {
    if targets.len() != train.len() {
        return Err(Error::Shape {
            expected: train.len(),
            got: targets.len(),
        });
    }
    for (i, j) in targets.pairs() {
        if j >= train.len() || j == i || train[j].y != train[i].y {
            return Err(Error::InvalidTriple {
                i,
                j,
                l: j,
                reason: "target neighbor must be a distinct same-class instance",
            });
        }
    }
    Ok(())
}

fn check_metric(metric: &Metric, train: &[LabeledInstance]) -> Result<()> {
    let dim = check_instances(train)?;
    if !train.is_empty() && dim != metric.dim() {
        return Err(Error::Shape {
            expected: metric.dim(),
            got: dim,
        });
    }
    Ok(())
}

/// `w · Σ_{j→i} d²(x_i, x_j) + μ · Σ_{j→i, y_l ≠ y_i} hinge(i, j, l)` with
/// `w` given by `pull_weight`.
pub fn objective(
    metric: &Metric,
    train: &[LabeledInstance],
    targets: &TargetNeighborMap,
    mu: f64,
    pull_weight: PullWeight,
    exec: Execution,
) -> Result<f64> {
    check_metric(metric, train)?;
    check_targets(train, targets)?;
    let points = embed(metric.matrix(), train)?;
    let terms = exec.map_range(train.len(), |i| {
        let t = instance_terms(
            &points,
            train,
            targets,
            i,
            ImpostorScan::AllDifferentLabel,
            0,
        );
        (t.pull, t.hinge)
    });
    let (pull, hinge) = terms
        .into_iter()
        .fold((0.0, 0.0), |(p, h), (tp, th)| (p + tp, h + th));
    Ok(pull_weight.factor(mu) * pull + mu * hinge)
}

/// Triples `(i, j, l)` with `j → i`, `y_l ≠ y_i` and a strictly positive
/// hinge loss, ordered by `i`, then target order, then `l`.
///
/// With [`ImpostorScan::NearestK`], `l` ranges over the `k` nearest
/// neighbors of `i` only.
pub fn find_active_triples(
    metric: &Metric,
    train: &[LabeledInstance],
    targets: &TargetNeighborMap,
    scan: ImpostorScan,
    k: usize,
    exec: Execution,
) -> Result<Vec<ActiveTriple>> {
    check_metric(metric, train)?;
    check_targets(train, targets)?;
    let points = embed(metric.matrix(), train)?;
    Ok(exec
        .map_range(train.len(), |i| {
            instance_terms(&points, train, targets, i, scan, k).active
        })
        .into_iter()
        .flatten()
        .collect())
}

/// Number of active triples under the full impostor scan.
pub fn impostor_count(
    metric: &Metric,
    train: &[LabeledInstance],
    targets: &TargetNeighborMap,
    exec: Execution,
) -> Result<usize> {
    find_active_triples(
        metric,
        train,
        targets,
        ImpostorScan::AllDifferentLabel,
        0,
        exec,
    )
    .map(|a| a.len())
}

/// `G = w · Σ_{j→i} C_ij + μ · Σ_{(i,j,l) ∈ active} (C_ij − C_il)`.
pub fn gradient(
    train: &[LabeledInstance],
    targets: &TargetNeighborMap,
    active: &[ActiveTriple],
    mu: f64,
    pull_weight: PullWeight,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    let dim = check_instances(train)?;
    check_targets(train, targets)?;
    let n = train.len();
    let mut by_instance: Vec<Vec<ActiveTriple>> = vec![Vec::new(); n];
    for &t in active {
        if t.i >= n || t.j >= n || t.l >= n {
            return Err(Error::InvalidTriple {
                i: t.i,
                j: t.j,
                l: t.l,
                reason: "index out of range",
            });
        }
        by_instance[t.i].push(t);
    }
    let w = pull_weight.factor(mu);
    let partials = exec.map_range(n, |i| {
        let mut coef = vec![0.0; n];
        for &j in targets.of(i) {
            coef[j] += w;
        }
        for t in &by_instance[i] {
            coef[t.j] += mu;
            coef[t.l] -= mu;
        }
        let mut partial = DMatrix::<f64>::zeros(dim, dim);
        let mut diff = vec![0.0; dim];
        for (o, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (d, (a, b)) in diff.iter_mut().zip(train[i].x.iter().zip(&train[o].x)) {
                *d = a - b;
            }
            for col in 0..dim {
                let scaled = c * diff[col];
                for (row, &d) in diff.iter().enumerate() {
                    partial[(row, col)] += d * scaled;
                }
            }
        }
        partial
    });
    Ok(partials
        .into_iter()
        .fold(DMatrix::zeros(dim, dim), |acc, p| acc + p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective at the metric the step started from.
    pub objective: f64,
    pub active_triples: usize,
    /// ‖M_{t+1} − M_t‖_F.
    pub step_norm: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metric: Metric,
    pub history: Vec<IterationRecord>,
    /// Every iterate M_0, M_1, … expressed over the raw features.
    pub iterates: Vec<Metric>,
    /// Set when a step left M unchanged before the iteration budget ran out.
    pub converged_early: bool,
}

/// Projected gradient descent from the identity metric:
/// `M_{t+1} = P_S(M_t − step · G_t)` for `max_iterations` steps.
pub fn train(dataset: &Dataset, config: &TrainConfig, exec: Execution) -> Result<Metric> {
    train_detailed(dataset, config, exec).map(|o| o.metric)
}

pub fn train_detailed(
    dataset: &Dataset,
    config: &TrainConfig,
    exec: Execution,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.dim() == 0 {
        return Err(Error::Training("dataset has no features".into()));
    }
    if dataset.distinct_labels() < 2 {
        return Err(Error::Training(
            "need instances from at least two classes".into(),
        ));
    }
    let names = dataset.feature_names().to_vec();
    let dim = dataset.dim();

    let scaler = config
        .standardize
        .then(|| Standardizer::fit(dataset.instances()));
    let owned;
    let train: &[LabeledInstance] = match &scaler {
        Some(s) => {
            owned = dataset
                .instances()
                .iter()
                .map(|t| LabeledInstance::new(s.transform(&t.x), t.y))
                .collect::<Vec<_>>();
            &owned
        }
        None => dataset.instances(),
    };
    // d²(S a, S b) with S = diag(1/σ) equals the raw-space form with S M S.
    let to_raw = |m: &DMatrix<f64>| -> Metric {
        let raw = match &scaler {
            Some(s) => DMatrix::from_fn(dim, dim, |r, c| m[(r, c)] / (s.scale[r] * s.scale[c])),
            None => m.clone(),
        };
        Metric::from_trusted(raw, names.clone())
    };

    let targets = select_target_neighbors(train, config.k, exec)?;
    let w = config.pull_weight.factor(config.mu);
    let mut m = DMatrix::<f64>::identity(dim, dim);
    let mut history = Vec::with_capacity(config.max_iterations);
    let mut iterates = vec![to_raw(&m)];
    let mut converged_early = false;

    for iteration in 0..config.max_iterations {
        let points = embed(&m, train)?;
        let terms = exec.map_range(train.len(), |i| {
            instance_terms(&points, train, &targets, i, config.impostor_scan, config.k)
        });
        let mut pull = 0.0;
        let mut hinge = 0.0;
        let mut active = Vec::new();
        for t in terms {
            pull += t.pull;
            hinge += t.hinge;
            active.extend(t.active);
        }
        let g = gradient(
            train,
            &targets,
            &active,
            config.mu,
            config.pull_weight,
            exec,
        )?;
        let next = psd_project(&(&m - g * config.step))?;
        let step_norm = (&next - &m).norm();
        history.push(IterationRecord {
            iteration,
            objective: w * pull + config.mu * hinge,
            active_triples: active.len(),
            step_norm,
        });
        m = next;
        iterates.push(to_raw(&m));
        // At an exact fixed point every remaining step is a no-op.
        if step_norm == 0.0 {
            converged_early = iteration + 1 < config.max_iterations;
            break;
        }
    }

    Ok(TrainOutcome {
        metric: to_raw(&m),
        history,
        iterates,
        converged_early,
    })
}

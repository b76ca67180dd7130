//! Distance-weighted k-nearest-neighbor classification under a learned
//! metric. Each neighbor votes `1/d²` for its class.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lmnn::Metric;

/// Neighbors closer than this count as coincident with the query.
pub const ZERO_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// Predicted class index.
    pub label: usize,
    /// Accumulated vote per class index. On an exact match this is one-hot.
    pub weights: Vec<f64>,
    /// Training indices of the k nearest neighbors, nearest first.
    pub neighbors: Vec<usize>,
    pub distances: Vec<f64>,
    /// Training index of the coincident neighbor that decided the vote.
    pub exact_match: Option<usize>,
}

fn check_query(metric: &Metric, train: &Dataset, query: &[f64], k: usize) -> Result<()> {
    if k == 0 || k > train.len() {
        return Err(Error::InvalidK {
            k,
            available: train.len(),
        });
    }
    if query.len() != metric.dim() || train.dim() != metric.dim() {
        return Err(Error::Shape {
            expected: metric.dim(),
            got: if query.len() != metric.dim() {
                query.len()
            } else {
                train.dim()
            },
        });
    }
    Ok(())
}

fn nearest_with_distances(
    metric: &Metric,
    train: &Dataset,
    query: &[f64],
    k: usize,
) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = train
        .instances()
        .iter()
        .enumerate()
        .map(|(i, t)| (metric.distance_unchecked(query, &t.x), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_distance);
        all.truncate(k);
    }
    all.sort_by(by_distance);
    all
}

/// Indices of the `k` training instances nearest to `query`, nearest first.
/// Equal distances are ordered by index.
pub fn k_nearest(metric: &Metric, train: &Dataset, query: &[f64], k: usize) -> Result<Vec<usize>> {
    check_query(metric, train, query, k)?;
    Ok(nearest_with_distances(metric, train, query, k)
        .into_iter()
        .map(|(_, i)| i)
        .collect())
}

pub fn classify(metric: &Metric, train: &Dataset, query: &[f64], k: usize) -> Result<Prediction> {
    check_query(metric, train, query, k)?;
    let nearest = nearest_with_distances(metric, train, query, k);
    let insts = train.instances();
    let mut weights = vec![0.0; train.n_classes()];
    let exact_match = nearest
        .iter()
        .filter(|(d, _)| *d < ZERO_DISTANCE)
        .map(|&(_, i)| i)
        .min();
    let label = match exact_match {
        Some(i) => {
            weights[insts[i].y] = 1.0;
            insts[i].y
        }
        None => {
            for &(d, i) in &nearest {
                weights[insts[i].y] += 1.0 / d;
            }
            let mut best = insts[nearest[0].1].y;
            for (c, &w) in weights.iter().enumerate() {
                if w > weights[best] || (w == weights[best] && c < best) {
                    best = c;
                }
            }
            best
        }
    };
    Ok(Prediction {
        label,
        weights,
        neighbors: nearest.iter().map(|&(_, i)| i).collect(),
        distances: nearest.iter().map(|&(d, _)| d).collect(),
        exact_match,
    })
}

/// Classifies every query, results in query order.
pub fn classify_batch(
    metric: &Metric,
    train: &Dataset,
    queries: &[Vec<f64>],
    k: usize,
    exec: Execution,
) -> Result<Vec<Prediction>> {
    exec.map_slice(queries, |q| classify(metric, train, q, k))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledInstance;

    fn line(points: &[(f64, usize)], classes: usize) -> Dataset {
        Dataset::new(
            vec!["x".into()],
            (0..classes)
                .map(|c| ((b'A' + c as u8) as char).to_string())
                .collect(),
            points
                .iter()
                .map(|&(x, y)| LabeledInstance::new(vec![x], y))
                .collect(),
        )
        .unwrap()
    }

    fn id() -> Metric {
        Metric::identity(vec!["x".into()])
    }

    #[test]
    fn k_nearest_orders_by_distance_then_index() {
        let train = line(&[(3.0, 0), (1.0, 0), (-1.0, 1), (0.5, 1)], 2);
        assert_eq!(
            k_nearest(&id(), &train, &[0.0], 4).unwrap(),
            vec![3, 1, 2, 0]
        );
        assert_eq!(k_nearest(&id(), &train, &[1.0], 1).unwrap(), vec![1]);
        assert!(matches!(
            k_nearest(&id(), &train, &[0.0], 5),
            Err(Error::InvalidK { k: 5, available: 4 })
        ));
        assert!(k_nearest(&id(), &train, &[0.0], 0).is_err());
        assert!(k_nearest(&id(), &train, &[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn inverse_distance_votes() {
        // Squared distances 1 (A), 2 and 3 (B): A = 1, B = 1/2 + 1/3.
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        let train = line(&[(1.0, 0), (-s2, 1), (s3, 1)], 2);
        let p = classify(&id(), &train, &[0.0], 3).unwrap();
        assert_eq!(p.label, 0);
        assert!((p.weights[0] - 1.0).abs() < 1e-12);
        assert!((p.weights[1] - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(p.exact_match, None);
    }

    #[test]
    fn k_one_returns_nearest_class() {
        let train = line(&[(0.0, 0), (10.0, 1)], 2);
        assert_eq!(classify(&id(), &train, &[6.0], 1).unwrap().label, 1);
        assert_eq!(classify(&id(), &train, &[4.0], 1).unwrap().label, 0);
    }

    #[test]
    fn coincident_neighbor_wins() {
        let train = line(&[(0.5, 1), (0.6, 1), (0.0, 0), (0.4, 1)], 2);
        let p = classify(&id(), &train, &[0.0], 3).unwrap();
        assert_eq!(p.label, 0);
        assert_eq!(p.exact_match, Some(2));
        assert_eq!(p.weights, vec![1.0, 0.0]);
        // Several coincident neighbors: lowest training index decides.
        let train = line(&[(0.0, 1), (0.0, 0)], 2);
        assert_eq!(classify(&id(), &train, &[0.0], 2).unwrap().label, 1);
    }

    #[test]
    fn equal_weights_go_to_lower_class() {
        let train = line(&[(1.0, 1), (-1.0, 0)], 2);
        let p = classify(&id(), &train, &[0.0], 2).unwrap();
        assert_eq!(p.label, 0);
    }

    #[test]
    fn batch_matches_single() {
        let train = line(&[(0.0, 0), (1.0, 0), (5.0, 1), (6.0, 1)], 2);
        let queries: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.37]).collect();
        let batch = classify_batch(&id(), &train, &queries, 3, Execution::Parallel).unwrap();
        for (q, p) in queries.iter().zip(&batch) {
            assert_eq!(&classify(&id(), &train, q, 3).unwrap(), p);
        }
    }
}

//! Gain-ratio decision tree used to pick a feature subset.
//!
//! Splits are binary on numeric thresholds placed midway between adjacent
//! distinct values, instances with `value <= threshold` going left. The tree
//! is grown without pruning; every feature tested at an interior node is
//! part of the selected subset.

use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Minimum information gain (bits) for a split to count as useful.
const MIN_GAIN: f64 = 1e-12;

pub const DEFAULT_MIN_LEAF: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        class: usize,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn interior_count(&self) -> usize {
        fn walk(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    pub fn leaf_count(&self) -> usize {
        fn walk(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    /// Fraction of the dataset's instances the tree labels correctly.
    pub fn accuracy_on(&self, dataset: &Dataset) -> f64 {
        if dataset.is_empty() {
            return 0.0;
        }
        let correct = dataset
            .instances()
            .iter()
            .filter(|inst| self.predict(&inst.x) == inst.y)
            .count();
        correct as f64 / dataset.len() as f64
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(&self.root, 0, &mut out);
        out
    }

    fn render_node(&self, node: &TreeNode, depth: usize, out: &mut String) {
        let indent = "|   ".repeat(depth);
        match node {
            TreeNode::Leaf { class, count } => {
                let _ = writeln!(out, "{indent}{} ({count})", self.class_names[*class]);
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let name = &self.feature_names[*feature];
                let _ = writeln!(out, "{indent}{name} <= {threshold}");
                self.render_node(left, depth + 1, out);
                let _ = writeln!(out, "{indent}{name} > {threshold}");
                self.render_node(right, depth + 1, out);
            }
        }
    }
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

/// (gain, gain ratio) of splitting `parent` into `left` and the remainder.
fn split_scores(parent: &[usize], left: &[usize], n_left: usize, n_total: usize) -> (f64, f64) {
    let right: Vec<usize> = parent.iter().zip(left).map(|(p, l)| p - l).collect();
    let n_right = n_total - n_left;
    let t = n_total as f64;
    let children = (n_left as f64 / t) * entropy(left, n_left)
        + (n_right as f64 / t) * entropy(&right, n_right);
    let gain = (entropy(parent, n_total) - children).max(0.0);
    let intrinsic = entropy(&[n_left, n_right], n_total);
    (gain, gain / intrinsic)
}

/// Gain ratio of splitting the whole dataset on `feature <= threshold`.
pub fn gain_ratio(dataset: &Dataset, feature: &str, threshold: f64) -> Result<f64> {
    let col = dataset
        .feature_index(feature)
        .ok_or_else(|| Error::Dataset(format!("unknown feature `{feature}`")))?;
    let k = dataset.n_classes();
    let mut parent = vec![0; k];
    let mut left = vec![0; k];
    let mut n_left = 0;
    for inst in dataset.instances() {
        parent[inst.y] += 1;
        if inst.x[col] <= threshold {
            left[inst.y] += 1;
            n_left += 1;
        }
    }
    if n_left == 0 || n_left == dataset.len() {
        return Err(Error::InvalidSplit { threshold });
    }
    Ok(split_scores(&parent, &left, n_left, dataset.len()).1)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    ratio: f64,
}

struct Builder<'a> {
    dataset: &'a Dataset,
    min_leaf: usize,
    exec: Execution,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.dataset.n_classes()];
        for &i in idx {
            counts[self.dataset.instances()[i].y] += 1;
        }
        counts
    }

    fn best_for_feature(
        &self,
        feature: usize,
        idx: &[usize],
        parent: &[usize],
    ) -> Option<Candidate> {
        let insts = self.dataset.instances();
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| insts[a].x[feature].total_cmp(&insts[b].x[feature]));
        let n = order.len();
        let mut left = vec![0; parent.len()];
        let mut best: Option<Candidate> = None;
        for p in 0..n - 1 {
            left[insts[order[p]].y] += 1;
            let n_left = p + 1;
            let lo = insts[order[p]].x[feature];
            let hi = insts[order[p + 1]].x[feature];
            if lo >= hi || n_left < self.min_leaf || n - n_left < self.min_leaf {
                continue;
            }
            let (gain, ratio) = split_scores(parent, &left, n_left, n);
            if gain <= MIN_GAIN {
                continue;
            }
            if best.is_none_or(|b| ratio > b.ratio) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    ratio,
                });
            }
        }
        best
    }

    fn grow(&self, idx: Vec<usize>) -> TreeNode {
        let counts = self.counts(&idx);
        let majority = counts
            .iter()
            .enumerate()
            .fold(0, |best, (c, &n)| if n > counts[best] { c } else { best });
        let leaf = TreeNode::Leaf {
            class: majority,
            count: idx.len(),
        };
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < 2 * self.min_leaf {
            return leaf;
        }
        let candidates = self.exec.map_range(self.dataset.dim(), |f| {
            self.best_for_feature(f, &idx, &counts)
        });
        let best = candidates
            .into_iter()
            .flatten()
            .fold(None::<Candidate>, |acc, c| match acc {
                Some(a) if a.ratio >= c.ratio => Some(a),
                _ => Some(c),
            });
        let Some(best) = best else {
            return leaf;
        };
        let insts = self.dataset.instances();
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| insts[i].x[best.feature] <= best.threshold);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left)),
            right: Box::new(self.grow(right)),
        }
    }
}

/// Grows an unpruned gain-ratio tree. Ties in gain ratio go to the lower
/// feature index, then the lower threshold.
pub fn build_tree(dataset: &Dataset, min_leaf: usize, exec: Execution) -> Result<DecisionTree> {
    if dataset.is_empty() {
        return Err(Error::Dataset(
            "cannot build a tree on an empty dataset".into(),
        ));
    }
    if min_leaf == 0 {
        return Err(Error::Parameter("min_leaf must be positive".into()));
    }
    let builder = Builder {
        dataset,
        min_leaf,
        exec,
    };
    let root = builder.grow((0..dataset.len()).collect());
    Ok(DecisionTree {
        root,
        feature_names: dataset.feature_names().to_vec(),
        class_names: dataset.class_names().to_vec(),
    })
}

/// Names of all features tested at interior nodes, in dataset column order.
pub fn select_features(tree: &DecisionTree) -> Vec<String> {
    fn walk(n: &TreeNode, used: &mut [bool]) {
        if let TreeNode::Split {
            feature,
            left,
            right,
            ..
        } = n
        {
            used[*feature] = true;
            walk(left, used);
            walk(right, used);
        }
    }
    let mut used = vec![false; tree.feature_names.len()];
    walk(&tree.root, &mut used);
    tree.feature_names
        .iter()
        .zip(used)
        .filter(|&(_, u)| u)
        .map(|(name, _)| name.clone())
        .collect()
}

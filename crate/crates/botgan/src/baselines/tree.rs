//! Decision tree (Gini impurity, threshold splits) and a bagged random
//! forest built on it.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        bot_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TreeHyperparams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` tries every feature (in index
    /// order, consuming no randomness).
    pub features_per_split: Option<usize>,
}

impl Default for TreeHyperparams {
    fn default() -> Self {
        TreeHyperparams {
            max_depth: None,
            min_samples_split: 2,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub n_features: usize,
}

fn gini(bots: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = bots as f64 / total as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct TreeBuilder<'f, 'l> {
    features: ArrayView2<'f, f64>,
    labels: &'l [u8],
    hp: TreeHyperparams,
}

impl TreeBuilder<'_, '_> {
    fn build(&self, rows: &mut [usize], depth: usize, rng: &mut Rng) -> Node {
        let total = rows.len();
        let bots = rows.iter().filter(|&&i| self.labels[i] == 1).count();
        let leaf = || Node::Leaf {
            bot_fraction: bots as f64 / total as f64,
        };

        if bots == 0 || bots == total || total < self.hp.min_samples_split {
            return leaf();
        }
        if let Some(max) = self.hp.max_depth {
            if depth >= max {
                return leaf();
            }
        }

        let d = self.features.ncols();
        let candidates: Vec<usize> = match self.hp.features_per_split {
            Some(m) if m < d => {
                let mut all: Vec<usize> = (0..d).collect();
                // Partial Fisher-Yates: the first m entries are a uniform
                // sample without replacement.
                for i in 0..m {
                    let j = i + rng.index(d - i);
                    all.swap(i, j);
                }
                all.truncate(m);
                all
            }
            _ => (0..d).collect(),
        };

        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        let mut order: Vec<usize> = rows.to_vec();
        for &f in &candidates {
            order.sort_by(|&a, &b| {
                self.features[[a, f]]
                    .partial_cmp(&self.features[[b, f]])
                    .unwrap()
            });
            let mut left_bots = 0usize;
            for i in 0..total - 1 {
                if self.labels[order[i]] == 1 {
                    left_bots += 1;
                }
                let (lo, hi) = (self.features[[order[i], f]], self.features[[order[i + 1], f]]);
                if lo == hi {
                    continue;
                }
                let n_left = i + 1;
                let n_right = total - n_left;
                let weighted = (n_left as f64 * gini(left_bots, n_left)
                    + n_right as f64 * gini(bots - left_bots, n_right))
                    / total as f64;
                if best.is_none_or(|(g, _, _)| weighted < g) {
                    best = Some((weighted, f, 0.5 * (lo + hi)));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            // Every candidate feature is constant on this node.
            return leaf();
        };

        let split_at = partition(rows, |&i| self.features[[i, feature]] <= threshold);
        let (left_rows, right_rows) = rows.split_at_mut(split_at);
        let left = self.build(left_rows, depth + 1, rng);
        let right = self.build(right_rows, depth + 1, rng);
        Node::Split {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Stable partition: moves items satisfying `pred` to the front, returns
/// the boundary.
fn partition<T: Copy, F: Fn(&T) -> bool>(items: &mut [T], pred: F) -> usize {
    let mut kept: Vec<T> = Vec::with_capacity(items.len());
    let mut rest: Vec<T> = Vec::new();
    for &x in items.iter() {
        if pred(&x) {
            kept.push(x);
        } else {
            rest.push(x);
        }
    }
    let boundary = kept.len();
    items[..boundary].copy_from_slice(&kept);
    items[boundary..].copy_from_slice(&rest);
    boundary
}

impl DecisionTree {
    pub fn fit(
        features: ArrayView2<f64>,
        labels: &[u8],
        hp: TreeHyperparams,
        rng: &mut Rng,
    ) -> Result<DecisionTree> {
        if features.nrows() == 0 {
            return Err(Error::Domain("tree needs training rows".into()));
        }
        if features.nrows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} rows vs {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        let builder = TreeBuilder {
            features,
            labels,
            hp,
        };
        let mut rows: Vec<usize> = (0..features.nrows()).collect();
        Ok(DecisionTree {
            root: builder.build(&mut rows, 0, rng),
            n_features: features.ncols(),
        })
    }

    fn leaf_fraction(&self, row: ndarray::ArrayView1<f64>) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { bot_fraction } => return *bot_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Bot fraction of the leaf each row lands in.
    pub fn scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        if features.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "query width {} does not match training width {}",
                features.ncols(),
                self.n_features
            )));
        }
        Ok(features
            .rows()
            .into_iter()
            .map(|row| self.leaf_fraction(row))
            .collect())
    }

    pub fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<u8>> {
        Ok(self
            .scores(features)?
            .iter()
            .map(|&s| u8::from(s >= 0.5))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    /// Candidate features per split; `None` uses `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams {
            n_trees: 100,
            max_depth: Some(12),
            bootstrap: true,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Trains `n_trees` trees on bootstrap resamples with per-tree derived
    /// seeds; trees build in parallel without affecting the result.
    pub fn fit(
        features: ArrayView2<f64>,
        labels: &[u8],
        hp: ForestHyperparams,
        rng: &Rng,
    ) -> Result<RandomForest> {
        if hp.n_trees == 0 {
            return Err(Error::Domain("forest needs at least one tree".into()));
        }
        let n = features.nrows();
        if n == 0 {
            return Err(Error::Domain("forest needs training rows".into()));
        }
        let d = features.ncols();
        let mtry = hp
            .features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d);
        let tree_hp = TreeHyperparams {
            max_depth: hp.max_depth,
            min_samples_split: 2,
            features_per_split: if mtry < d { Some(mtry) } else { None },
        };

        use rayon::prelude::*;
        let trees: Vec<DecisionTree> = (0..hp.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut tree_rng = rng.derive(&format!("tree/{t}"));
                if hp.bootstrap {
                    let sample: Vec<usize> = (0..n).map(|_| tree_rng.index(n)).collect();
                    let boot_features =
                        ndarray::Array2::from_shape_fn((n, d), |(i, j)| features[[sample[i], j]]);
                    let boot_labels: Vec<u8> = sample.iter().map(|&i| labels[i]).collect();
                    DecisionTree::fit(boot_features.view(), &boot_labels, tree_hp, &mut tree_rng)
                } else {
                    DecisionTree::fit(features, labels, tree_hp, &mut tree_rng)
                }
            })
            .collect::<Result<_>>()?;
        Ok(RandomForest { trees })
    }

    /// Fraction of trees voting bot.
    pub fn scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        let mut votes = vec![0usize; features.nrows()];
        for tree in &self.trees {
            for (i, &s) in tree.scores(features)?.iter().enumerate() {
                if s >= 0.5 {
                    votes[i] += 1;
                }
            }
        }
        Ok(votes
            .iter()
            .map(|&v| v as f64 / self.trees.len() as f64)
            .collect())
    }
}

//! CART classification trees with Gini impurity and bootstrap forests.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::util::{check_train, majority, mix_seed};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    /// Nodes with fewer rows become leaves.
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    max_features: usize,
    min_samples_split: usize,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: &mut [usize]) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: 0 });
        let class = majority(rows.iter().map(|&r| self.y[r]), self.n_classes);
        let pure = rows.iter().all(|&r| self.y[r] == self.y[rows[0]]);
        if pure || rows.len() < self.min_samples_split {
            self.nodes[id] = Node::Leaf { class };
            return id;
        }
        let Some(best) = self.best_split(rows) else {
            self.nodes[id] = Node::Leaf { class };
            return id;
        };
        let mut split = 0;
        for i in 0..rows.len() {
            if self.x[rows[i]][best.feature] <= best.threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Tries features in a random order; the first `max_features` are
    /// always scored and further ones only until some valid split exists.
    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        let mut total = vec![0usize; self.n_classes];
        for &r in rows {
            total[self.y[r]] += 1;
        }
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.max_features && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let n = sorted.len();
            for i in 0..n - 1 {
                let c = self.y[sorted[i]];
                left[c] += 1;
                let lo = self.x[sorted[i]][f];
                let hi = self.x[sorted[i + 1]][f];
                if lo >= hi {
                    continue;
                }
                let n_left = (i + 1) as f64;
                let n_right = (n - i - 1) as f64;
                let sum_sq_left: f64 = left.iter().map(|&v| (v * v) as f64).sum();
                let sum_sq_right: f64 = left
                    .iter()
                    .zip(&total)
                    .map(|(&l, &t)| ((t - l) * (t - l)) as f64)
                    .sum();
                // maximizing this minimizes the size-weighted Gini impurity
                let score = sum_sq_left / n_left + sum_sq_right / n_right;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mid = 0.5 * (lo + hi);
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Fits one tree on `rows` (indices into `x`, duplicates allowed).
pub fn fit_tree(
    x: &[Vec<f64>],
    y: &[usize],
    rows: &mut [usize],
    n_classes: usize,
    max_features: usize,
    min_samples_split: usize,
    seed: u64,
) -> DecisionTree {
    let mut builder = TreeBuilder {
        x,
        y,
        n_classes,
        max_features: max_features.max(1),
        min_samples_split: min_samples_split.max(2),
        nodes: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    builder.grow(rows);
    DecisionTree {
        nodes: builder.nodes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    /// Accuracy of each row voted only by trees that did not draw it.
    pub oob_accuracy: Option<f64>,
}

impl ForestModel {
    pub fn fit(train: &FeatureMatrix, params: &ForestParams, seed: u64) -> Result<Self> {
        Self::fit_weighted(train, params, None, seed)
    }

    /// With `weights`, each tree's bootstrap draws rows proportionally to
    /// them.
    pub fn fit_weighted(
        train: &FeatureMatrix,
        params: &ForestParams,
        weights: Option<&[f64]>,
        seed: u64,
    ) -> Result<Self> {
        let n_classes = check_train(train)?;
        if params.n_trees == 0 {
            return Err(Error::Config("random forest needs at least one tree".into()));
        }
        let n = train.n_rows();
        let d = train.n_features();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d);
        let sampler = match weights {
            Some(w) => Some(
                WeightedIndex::new(w)
                    .map_err(|e| Error::Training(format!("bad sample weights: {e}")))?,
            ),
            None => None,
        };

        let fitted: Vec<(DecisionTree, Vec<bool>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let tree_seed = mix_seed(seed, t as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let mut rows: Vec<usize> = if params.bootstrap {
                    match &sampler {
                        Some(s) => (0..n).map(|_| s.sample(&mut rng)).collect(),
                        None => (0..n).map(|_| rng.gen_range(0..n)).collect(),
                    }
                } else {
                    (0..n).collect()
                };
                let mut in_bag = vec![false; n];
                rows.iter().for_each(|&r| in_bag[r] = true);
                let tree = fit_tree(
                    &train.values,
                    &train.labels,
                    &mut rows,
                    n_classes,
                    max_features,
                    params.min_samples_split,
                    rng.gen(),
                );
                (tree, in_bag)
            })
            .collect();

        let oob_accuracy = params.bootstrap.then(|| {
            let mut correct = 0usize;
            let mut counted = 0usize;
            for (i, (row, &label)) in train.values.iter().zip(&train.labels).enumerate() {
                let votes = fitted
                    .iter()
                    .filter(|(_, bag)| !bag[i])
                    .map(|(t, _)| t.predict_row(row));
                let mut any = false;
                let pred = majority(votes.inspect(|_| any = true), n_classes);
                if any {
                    counted += 1;
                    correct += usize::from(pred == label);
                }
            }
            if counted == 0 {
                0.0
            } else {
                correct as f64 / counted as f64
            }
        });

        Ok(Self {
            trees: fitted.into_iter().map(|(t, _)| t).collect(),
            n_classes,
            oob_accuracy,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        majority(self.trees.iter().map(|t| t.predict_row(row)), self.n_classes)
    }
}

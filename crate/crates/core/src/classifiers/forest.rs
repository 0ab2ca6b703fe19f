//! Random forest of Gini-split decision trees.
//!
//! Tree `t` draws all of its randomness (bootstrap sample and per-node
//! feature subsets) from ChaCha8 seeded with `seed` on stream `t`, so a tree
//! depends only on `(seed, t)` and trees can be grown in parallel.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{Label, LabelVector, Matrix};
use crate::error::{Error, Result};

use super::{check_dim, check_fit_inputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    /// `None` means `⌈√d⌉`.
    pub features_per_split: Option<usize>,
    pub min_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            features_per_split: None,
            min_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        positive: usize,
        negative: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, x: &[f64]) -> (usize, usize) {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
                Node::Leaf { positive, negative } => return (positive, negative),
            }
        }
    }

    pub fn positive_frequency(&self, x: &[f64]) -> f64 {
        let (p, n) = self.leaf_for(x);
        p as f64 / (p + n) as f64
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
    pub seed: u64,
}

impl ForestModel {
    /// Mean over trees of the leaf's positive-class frequency.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n_features, x)?;
        let sum: f64 = self.trees.iter().map(|t| t.positive_frequency(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// MAP label; a posterior of exactly 0.5 goes to `+1`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.predict_proba(x)? >= 0.5 {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

pub fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    rng
}

pub fn rf_fit(x: &Matrix, y: &LabelVector, params: &ForestParams) -> Result<ForestModel> {
    check_fit_inputs(x, y)?;
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if params.min_split < 2 {
        return Err(Error::InvalidParameter("min_split must be at least 2".into()));
    }
    let d = x.cols();
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let positive: Vec<bool> = y.labels.iter().map(|&l| l == Label::Positive).collect();

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let n = x.rows();
            let sample: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                x,
                positive: &positive,
                mtry,
                max_depth: params.max_depth,
                min_split: params.min_split,
                rng,
                nodes: Vec::new(),
            };
            builder.grow(sample, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: d,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        features_per_split: mtry,
        seed: params.seed,
    })
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Higher gain wins; equal gains go to the lower feature, then the lower
    /// threshold.
    fn beats(&self, other: &Candidate) -> bool {
        if self.gain != other.gain {
            return self.gain > other.gain;
        }
        (self.feature, self.threshold) < (other.feature, other.threshold)
    }
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    positive: &'a [bool],
    mtry: usize,
    max_depth: Option<usize>,
    min_split: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let pos = rows.iter().filter(|&&r| self.positive[r]).count();
        let total = rows.len();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            positive: pos,
            negative: total - pos,
        });

        let pure = pos == 0 || pos == total;
        let depth_capped = self.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || total < self.min_split {
            return id;
        }
        let Some(best) = self.best_split(&rows, pos) else {
            return id;
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x.get(r, best.feature) <= best.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Best split over a random feature subset. If every sampled feature is
    /// constant on this node, the remaining features are tried in the same
    /// shuffled order until one can split. Zero-gain splits are allowed so
    /// that impure nodes of distinct points always divide.
    fn best_split(&mut self, rows: &[usize], pos: usize) -> Option<Candidate> {
        let d = self.x.cols();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);

        let total = rows.len();
        let parent = gini(pos, total);
        let mut best: Option<Candidate> = None;
        let mut values: Vec<(f64, bool)> = Vec::with_capacity(total);

        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.mtry && best.is_some() {
                break;
            }
            values.clear();
            values.extend(rows.iter().map(|&r| (self.x.get(r, f), self.positive[r])));
            values.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_pos = 0;
            for i in 0..total - 1 {
                if values[i].1 {
                    left_pos += 1;
                }
                if values[i].0 == values[i + 1].0 {
                    continue;
                }
                let nl = i + 1;
                let nr = total - nl;
                let child = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(pos - left_pos, nr))
                    / total as f64;
                let cand = Candidate {
                    gain: parent - child,
                    feature: f,
                    threshold: 0.5 * (values[i].0 + values[i + 1].0),
                };
                if best.as_ref().is_none_or(|b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}

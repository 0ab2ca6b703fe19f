use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data_model::{Label, LabelVector, Matrix};
use crate::error::{Error, Result};

use super::{check_dim, check_fit_inputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    /// Squared distance for Euclidean (same ordering, no sqrt).
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
    #[serde(default)]
    pub metric: Metric,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 5,
            metric: Metric::Euclidean,
        }
    }
}

/// Lazy learner: keeps the training data verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Matrix,
    pub y: Vec<Label>,
    pub k: usize,
    pub metric: Metric,
}

pub fn knn_fit(x: &Matrix, y: &LabelVector, params: &KnnParams) -> Result<KnnModel> {
    if params.k % 2 == 0 {
        return Err(Error::EvenK(params.k));
    }
    if params.k > x.rows() {
        return Err(Error::KTooLarge {
            k: params.k,
            n: x.rows(),
        });
    }
    check_fit_inputs(x, y)?;
    Ok(KnnModel {
        x: x.clone(),
        y: y.labels.clone(),
        k: params.k,
        metric: params.metric,
    })
}

impl KnnModel {
    /// Indices of the `k` nearest training rows, nearest first; equal
    /// distances resolve to the lower training index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.x.cols(), x)?;
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| (self.metric.distance(r, x), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_unstable_by(cmp);
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let votes: i64 = self
            .neighbors(x)?
            .into_iter()
            .map(|i| i64::from(self.y[i].as_i8()))
            .sum();
        // k is odd, so the vote sum is never zero.
        Ok(match votes.cmp(&0) {
            Ordering::Less => Label::Negative,
            _ => Label::Positive,
        })
    }
}

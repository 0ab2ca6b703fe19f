//! Naive Bayes over mixed columns: Gaussian likelihoods for numeric columns,
//! Laplace-smoothed multinomials for one-hot groups.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data_model::{ColumnMeta, ColumnTag, Label, LabelVector, Matrix};
use crate::error::{Error, Result};

use super::{check_dim, check_fit_inputs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesParams {
    pub laplace_alpha: f64,
    pub variance_floor: f64,
}

impl Default for BayesParams {
    fn default() -> Self {
        Self {
            laplace_alpha: 1.0,
            variance_floor: 1e-9,
        }
    }
}

/// Per-class statistics are stored `[positive, negative]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianColumn {
    pub column: usize,
    pub mean: [f64; 2],
    pub variance: [f64; 2],
}

/// One-hot columns of a single source variable. When some of its indicator
/// columns were removed upstream, rows with none of the remaining columns set
/// fall into an extra "other" level, stored last in `probabilities`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalGroup {
    pub source: String,
    pub columns: Vec<usize>,
    pub has_other: bool,
    pub probabilities: [Vec<f64>; 2],
}

impl CategoricalGroup {
    fn level_of(&self, x: &[f64]) -> Option<usize> {
        let (best, value) = self
            .columns
            .iter()
            .enumerate()
            .map(|(l, &c)| (l, x[c]))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if value > 0.5 {
            Some(best)
        } else if self.has_other {
            Some(self.columns.len())
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    pub n_features: usize,
    pub priors: [f64; 2],
    pub numeric: Vec<GaussianColumn>,
    pub categorical: Vec<CategoricalGroup>,
    pub laplace_alpha: f64,
    pub variance_floor: f64,
}

fn class_slot(l: Label) -> usize {
    match l {
        Label::Positive => 0,
        Label::Negative => 1,
    }
}

/// Groups indicator columns by source variable, keeping only groups whose
/// training values are 0/1 with at most one active column per row.
fn indicator_groups(x: &Matrix, meta: &[ColumnMeta]) -> BTreeMap<String, (Vec<usize>, usize)> {
    let mut groups: BTreeMap<String, (Vec<usize>, usize)> = BTreeMap::new();
    for (j, m) in meta.iter().enumerate() {
        if let ColumnTag::Level { level_count, .. } = m.tag {
            let entry = groups.entry(m.source.clone()).or_insert((Vec::new(), level_count));
            entry.0.push(j);
        }
    }
    groups.retain(|_, (cols, _)| {
        x.iter_rows().all(|r| {
            let mut active = 0;
            for &c in cols.iter() {
                match r[c] {
                    v if v == 1.0 => active += 1,
                    v if v == 0.0 => {}
                    _ => return false,
                }
            }
            active <= 1
        })
    });
    groups
}

pub fn nb_fit(
    x: &Matrix,
    y: &LabelVector,
    column_meta: &[ColumnMeta],
    params: &BayesParams,
) -> Result<BayesModel> {
    check_fit_inputs(x, y)?;
    if column_meta.len() != x.cols() {
        return Err(Error::DimensionMismatch {
            expected: x.cols(),
            got: column_meta.len(),
        });
    }
    if !(params.laplace_alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "laplace_alpha must be positive, got {}",
            params.laplace_alpha
        )));
    }
    if !(params.variance_floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variance_floor must be positive, got {}",
            params.variance_floor
        )));
    }

    let n = x.rows();
    let mut counts = [0usize; 2];
    for &l in &y.labels {
        counts[class_slot(l)] += 1;
    }
    let priors = [counts[0] as f64 / n as f64, counts[1] as f64 / n as f64];

    let groups = indicator_groups(x, column_meta);
    let mut in_group = vec![false; x.cols()];
    let mut categorical = Vec::new();
    for (source, (columns, level_count)) in groups {
        for &c in &columns {
            in_group[c] = true;
        }
        let has_other = level_count > columns.len();
        let levels = columns.len() + usize::from(has_other);
        let mut level_counts = [vec![0usize; levels], vec![0usize; levels]];
        for (row, &l) in x.iter_rows().zip(&y.labels) {
            let level = columns
                .iter()
                .position(|&c| row[c] == 1.0)
                .unwrap_or(columns.len());
            if level < levels {
                level_counts[class_slot(l)][level] += 1;
            }
        }
        let alpha = params.laplace_alpha;
        let probabilities = [0, 1].map(|s| {
            let denom = counts[s] as f64 + alpha * levels as f64;
            level_counts[s]
                .iter()
                .map(|&c| (c as f64 + alpha) / denom)
                .collect()
        });
        categorical.push(CategoricalGroup {
            source,
            columns,
            has_other,
            probabilities,
        });
    }

    let mut numeric = Vec::new();
    for j in (0..x.cols()).filter(|&j| !in_group[j]) {
        let mut sum = [0.0; 2];
        for (row, &l) in x.iter_rows().zip(&y.labels) {
            sum[class_slot(l)] += row[j];
        }
        let mean = [sum[0] / counts[0] as f64, sum[1] / counts[1] as f64];
        let mut ss = [0.0; 2];
        for (row, &l) in x.iter_rows().zip(&y.labels) {
            let s = class_slot(l);
            ss[s] += (row[j] - mean[s]).powi(2);
        }
        let variance = [
            (ss[0] / counts[0] as f64).max(params.variance_floor),
            (ss[1] / counts[1] as f64).max(params.variance_floor),
        ];
        numeric.push(GaussianColumn {
            column: j,
            mean,
            variance,
        });
    }

    Ok(BayesModel {
        n_features: x.cols(),
        priors,
        numeric,
        categorical,
        laplace_alpha: params.laplace_alpha,
        variance_floor: params.variance_floor,
    })
}

impl BayesModel {
    /// `[ln P(+1) P(x|+1), ln P(-1) P(x|-1)]`.
    pub fn log_joint(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_dim(self.n_features, x)?;
        let mut lj = [self.priors[0].ln(), self.priors[1].ln()];
        for g in &self.numeric {
            let v = x[g.column];
            for s in 0..2 {
                let var = g.variance[s];
                lj[s] += -0.5 * (2.0 * PI * var).ln() - (v - g.mean[s]).powi(2) / (2.0 * var);
            }
        }
        for g in &self.categorical {
            if let Some(level) = g.level_of(x) {
                for s in 0..2 {
                    lj[s] += g.probabilities[s][level].ln();
                }
            }
        }
        Ok(lj)
    }

    /// `P(Y = +1 | x)`, normalized in log space.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let [lp, ln] = self.log_joint(x)?;
        Ok(if lp >= ln {
            1.0 / (1.0 + (ln - lp).exp())
        } else {
            let e = (lp - ln).exp();
            e / (1.0 + e)
        })
    }

    /// `+1` iff `P(+1|x) ≥ P(-1|x)`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let [lp, ln] = self.log_joint(x)?;
        Ok(if lp >= ln {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

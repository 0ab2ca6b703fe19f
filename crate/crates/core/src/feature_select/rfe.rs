//! Recursive feature elimination with a linear-SVM ranker.

use serde::{Deserialize, Serialize};

use crate::classifiers::svm::{self, LinearGram, SvmParams};
use crate::data_model::{EncodedMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::ingest::standardize_columns;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankerConfig {
    pub svm: SvmParams,
    /// Standardize columns before fitting so |w| is comparable across them.
    pub standardize: bool,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            svm: SvmParams::default(),
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Column indices in elimination order; the last entry is rank 1.
    pub order: Vec<usize>,
    /// |w| of the column eliminated in each round.
    pub scores_per_round: Vec<f64>,
}

impl FeatureRanking {
    /// Rank of `column` (1 = best).
    pub fn rank_of(&self, column: usize) -> Option<usize> {
        self.order
            .iter()
            .position(|&c| c == column)
            .map(|p| self.order.len() - p)
    }
}

/// Ranks every column by repeatedly fitting the ranker on the surviving
/// columns and eliminating the one with the smallest `|wⱼ|` (ties: lowest
/// index) until a single column remains.
///
/// The kernel matrix is downdated in place as columns go.
pub fn rfe_rank(matrix: &EncodedMatrix, labels: &LabelVector, ranker: &RankerConfig) -> Result<FeatureRanking> {
    let d = matrix.n_cols();
    if d < 2 {
        return Err(Error::InvalidParameter(format!("RFE needs at least 2 columns, got {d}")));
    }
    if matrix.n_rows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n_rows(),
            got: labels.len(),
        });
    }
    if !labels.has_both_classes() {
        return Err(Error::SingleClass);
    }
    svm::validate_params(&ranker.svm)?;

    let x = if ranker.standardize {
        standardize_columns(&matrix.values)
    } else {
        matrix.values.clone()
    };
    let n = x.rows();
    let y: Vec<f64> = labels.labels.iter().map(|l| l.sign()).collect();
    let max_iter = ranker.svm.update_budget(n);

    let mut gram = LinearGram::new(x);
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut order = Vec::with_capacity(d);
    let mut scores = Vec::with_capacity(d - 1);

    while remaining.len() > 1 {
        let sol = svm::solve_dual(&gram, &y, ranker.svm.c, ranker.svm.tol, max_iter);
        let w = svm::recover_weights(gram.features(), &y, &sol.alpha);
        let (pos, score) = w
            .iter()
            .map(|v| v.abs())
            .enumerate()
            .fold((0, f64::INFINITY), |best, (p, s)| if s < best.1 { (p, s) } else { best });
        order.push(remaining.remove(pos));
        scores.push(score);
        gram.remove_feature(pos);
    }
    order.push(remaining[0]);
    Ok(FeatureRanking {
        order,
        scores_per_round: scores,
    })
}

/// The `n_keep` best-ranked columns, in ascending index order.
pub fn rfe_select(ranking: &FeatureRanking, n_keep: usize) -> Result<Vec<usize>> {
    let total = ranking.order.len();
    if n_keep == 0 || n_keep > total {
        return Err(Error::InvalidParameter(format!(
            "n_keep must be in 1..={total}, got {n_keep}"
        )));
    }
    let mut kept = ranking.order[total - n_keep..].to_vec();
    kept.sort_unstable();
    Ok(kept)
}

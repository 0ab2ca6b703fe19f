use crate::data_model::EncodedMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.75;

/// Sample Pearson correlation. A constant input yields 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSplit {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
}

/// Scans columns in index order and removes column `j` when its absolute
/// correlation with an already kept earlier column exceeds `threshold`.
pub fn correlation_filter(matrix: &EncodedMatrix, threshold: f64) -> Result<CorrelationSplit> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "correlation threshold must be positive, got {threshold}"
        )));
    }
    let d = matrix.n_cols();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| matrix.values.column(j)).collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    for j in 0..d {
        let mut redundant = false;
        for &i in &kept {
            if pearson(&columns[i], &columns[j])?.abs() > threshold {
                redundant = true;
                break;
            }
        }
        if redundant {
            removed.push(j);
        } else {
            kept.push(j);
        }
    }
    Ok(CorrelationSplit { kept, removed })
}

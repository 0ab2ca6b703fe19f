//! Principal component analysis on the population covariance matrix, using a
//! cyclic Jacobi eigensolver.

use serde::{Deserialize, Serialize};

use crate::data_model::{ColumnMeta, ColumnTag, EncodedMatrix, Matrix};
use crate::error::{Error, Result};

pub const DEFAULT_VARIANCE_TARGET: f64 = 0.95;
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Row `i` is the `i`-th principal direction.
    pub components: Matrix,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Maps component scores back to the input space.
    pub fn inverse_transform(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &s) in scores.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(self.components.row(c)) {
                *o += s * v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Unsorted, in diagonal order.
    pub values: Vec<f64>,
    /// Column `i` of this row-major matrix pairs with `values[i]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over every upper-triangular pair, annihilating each off-diagonal
/// entry with a plane rotation, until the off-diagonal Frobenius norm falls
/// below `tol · max(‖A‖_F, 1)`.
pub fn jacobi_eigen(a: &Matrix, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.cols(),
        });
    }
    let mut m = a.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let scale = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let off_norm = |m: &Matrix| {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * m.get(p, q) * m.get(p, q);
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= tol * scale {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Ok(SymmetricEigen {
        values: (0..n).map(|i| m.get(i, i)).collect(),
        vectors: v,
        sweeps,
    })
}

/// Population covariance of the columns of `x` (divides by n).
pub fn covariance(x: &Matrix) -> (Vec<f64>, Matrix) {
    let (n, d) = (x.rows(), x.cols());
    let mut mean = vec![0.0; d];
    for r in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for r in x.iter_rows() {
        for j in 0..d {
            centered[j] = r[j] - mean[j];
        }
        for a in 0..d {
            for b in a..d {
                let v = cov.get(a, b) + centered[a] * centered[b];
                cov.set(a, b, v);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov.get(a, b) / n as f64;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    (mean, cov)
}

pub fn pca_fit(matrix: &EncodedMatrix) -> Result<PcaModel> {
    let x = &matrix.values;
    if x.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: x.rows(),
        });
    }
    let d = x.cols();
    let (mean, cov) = covariance(x);
    let eig = jacobi_eigen(&cov, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]).then(a.cmp(&b)));

    let mut components = Matrix::zeros(d, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (row, &src) in order.iter().enumerate() {
        let mut dir: Vec<f64> = (0..d).map(|k| eig.vectors.get(k, src)).collect();
        let pivot = dir
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            dir.iter_mut().for_each(|v| *v = -*v);
        }
        components.row_mut(row).copy_from_slice(&dir);
        // Covariance is PSD; tiny negatives are rounding.
        eigenvalues.push(eig.values[src].max(0.0));
    }
    let total: f64 = eigenvalues.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        // All-constant data: no direction explains anything, so treat them
        // as equally (un)informative.
        vec![1.0 / d.max(1) as f64; d]
    };
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
    })
}

/// Smallest `k ≥ 1` whose cumulative explained-variance ratio reaches `target`.
pub fn choose_components(model: &PcaModel, variance_target: f64) -> Result<usize> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance target must be in (0, 1], got {variance_target}"
        )));
    }
    let mut cumulative = 0.0;
    for (i, r) in model.explained_variance_ratio.iter().enumerate() {
        cumulative += r;
        // Ratios are rounded; without slack a target of 1.0 could be missed.
        if cumulative >= variance_target - 1e-12 {
            return Ok(i + 1);
        }
    }
    Ok(model.explained_variance_ratio.len().max(1))
}

pub fn pca_transform(model: &PcaModel, matrix: &EncodedMatrix, k: usize) -> Result<EncodedMatrix> {
    let d = model.dim();
    if matrix.n_cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: matrix.n_cols(),
        });
    }
    if k > model.components.rows() {
        return Err(Error::DimensionMismatch {
            expected: model.components.rows(),
            got: k,
        });
    }
    let n = matrix.n_rows();
    let mut out = Matrix::zeros(n, k);
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for (c, (x, m)) in centered.iter_mut().zip(matrix.values.row(i).iter().zip(&model.mean)) {
            *c = x - m;
        }
        for c in 0..k {
            let s = model
                .components
                .row(c)
                .iter()
                .zip(&centered)
                .map(|(a, b)| a * b)
                .sum();
            out.set(i, c, s);
        }
    }
    Ok(EncodedMatrix {
        values: out,
        column_meta: (0..k)
            .map(|index| ColumnMeta {
                source: format!("PC{}", index + 1),
                tag: ColumnTag::Component { index },
            })
            .collect(),
    })
}

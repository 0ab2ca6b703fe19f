//! Linear soft-margin SVM trained by sequential minimal optimization.
//!
//! The dual
//!
//! ```text
//! min_α  ½ αᵀQα − Σ αᵢ    s.t.  0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0,   Qᵢⱼ = yᵢ yⱼ xᵢ·xⱼ
//! ```
//!
//! is solved two coordinates at a time. Each step takes the maximal
//! KKT violator `i` and the partner `j` with the largest second-order
//! decrease, solves the two-variable subproblem in closed form and clips it
//! to the box. The stopping rule is `m(α) − M(α) ≤ tol`, the gap between the
//! largest and smallest `−yₜ∇ₜ` over the movable index sets.
//!
//! Large-C linear problems are degenerate and pairwise steps crawl on them,
//! so SMO starts from an interior-point estimate of the optimum and only has
//! to finish the last stretch; the stopping rule is the same either way.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{Label, LabelVector, Matrix};
use crate::error::{Error, Result};

use super::{check_dim, check_fit_inputs};

pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-3;

const TAU: f64 = 1e-12;
/// Largest training set for which the full Gram matrix is cached.
const DENSE_GRAM_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// Cap on passes, one pass being `n` SMO pair updates; `None` means
    /// `10 · n` passes.
    pub max_passes: Option<usize>,
}

impl SvmParams {
    /// Total pair-update budget for `n` training rows.
    pub fn update_budget(&self, n: usize) -> usize {
        self.max_passes.unwrap_or(10 * n).saturating_mul(n.max(1))
    }
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            tol: DEFAULT_TOL,
            max_passes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub alpha: Vec<f64>,
    pub converged: bool,
    /// `2 / ‖w‖`; `None` when `w = 0`.
    pub margin: Option<f64>,
    pub iterations: usize,
    /// Final `m(α) − M(α)`.
    pub kkt_gap: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.w.len(), x)?;
        Ok(dot(&self.w, x) + self.b)
    }

    /// `+1` iff the decision value is `≥ 0`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.decision(x)?))
    }

    /// `½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))`.
    pub fn primal_objective(&self, x: &Matrix, y: &LabelVector) -> f64 {
        primal_objective(&self.w, self.b, self.c, x, y)
    }

    /// `Σ αᵢ − ½‖w‖²`, with `w` as recovered from α.
    pub fn dual_objective(&self) -> f64 {
        self.alpha.iter().sum::<f64>() - 0.5 * dot(&self.w, &self.w)
    }
}

pub fn primal_objective(w: &[f64], b: f64, c: f64, x: &Matrix, y: &LabelVector) -> f64 {
    let hinge: f64 = x
        .iter_rows()
        .zip(&y.labels)
        .map(|(row, l)| (1.0 - l.sign() * (dot(w, row) + b)).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * hinge
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear kernel `K = X Xᵀ`, cached densely when small enough.
pub(crate) struct LinearGram {
    x: Matrix,
    dense: Option<Vec<f64>>,
    diag: Vec<f64>,
}

impl LinearGram {
    pub(crate) fn new(x: Matrix) -> Self {
        let n = x.rows();
        let diag: Vec<f64> = x.iter_rows().map(|r| dot(r, r)).collect();
        let dense = (n <= DENSE_GRAM_LIMIT).then(|| {
            let mut k = vec![0.0; n * n];
            k.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
                let xi = x.row(i);
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = dot(xi, x.row(j));
                }
            });
            k
        });
        Self { x, dense, diag }
    }

    pub(crate) fn n(&self) -> usize {
        self.x.rows()
    }

    pub(crate) fn features(&self) -> &Matrix {
        &self.x
    }

    /// Row `i` of `K`, borrowed from the cache or computed into `buf`.
    fn row<'a>(&'a self, i: usize, buf: &'a mut Vec<f64>) -> &'a [f64] {
        let n = self.n();
        match &self.dense {
            Some(k) => &k[i * n..(i + 1) * n],
            None => {
                let xi = self.x.row(i);
                buf.clear();
                buf.extend(self.x.iter_rows().map(|r| dot(xi, r)));
                buf
            }
        }
    }

    /// Drops feature column `j`: `K ← K − x_j x_jᵀ`.
    pub(crate) fn remove_feature(&mut self, j: usize) {
        let col = self.x.column(j);
        if let Some(k) = &mut self.dense {
            let n = col.len();
            k.par_chunks_mut(n.max(1)).enumerate().for_each(|(a, row)| {
                let ca = col[a];
                if ca != 0.0 {
                    for (slot, cb) in row.iter_mut().zip(&col) {
                        *slot -= ca * cb;
                    }
                }
            });
        }
        for (d, c) in self.diag.iter_mut().zip(&col) {
            *d -= c * c;
        }
        let keep: Vec<usize> = (0..self.x.cols()).filter(|&c| c != j).collect();
        self.x = self.x.select_columns(&keep);
    }
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
    pub gap: f64,
    pub converged: bool,
}

/// Gradient of the dual objective, `G = Q α − 1`, recomputed from scratch
/// through `w = Σ αₛ yₛ xₛ` since the kernel is linear.
fn full_gradient(x: &Matrix, y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let w = recover_weights(x, y, alpha);
    x.iter_rows().zip(y).map(|(r, &yt)| yt * dot(&w, r) - 1.0).collect()
}

/// Largest active set whose kernel block is copied into a compact matrix.
const COMPACT_LIMIT: usize = 2048;

/// Kernel rows of the problem restricted to `idx`.
enum ActiveRows<'a> {
    Full(&'a LinearGram),
    Compact(Vec<f64>),
    Mapped(&'a LinearGram, Vec<usize>),
}

impl<'a> ActiveRows<'a> {
    fn new(gram: &'a LinearGram, idx: &[usize]) -> Self {
        let m = idx.len();
        if m == gram.n() {
            return Self::Full(gram);
        }
        if m > COMPACT_LIMIT {
            return Self::Mapped(gram, idx.to_vec());
        }
        let mut k = vec![0.0; m * m];
        let mut buf = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            let row = gram.row(i, &mut buf);
            for (slot, &j) in k[a * m..(a + 1) * m].iter_mut().zip(idx) {
                *slot = row[j];
            }
        }
        Self::Compact(k)
    }

    fn row<'b>(&'b self, i: usize, m: usize, buf: &'b mut Vec<f64>) -> &'b [f64] {
        match self {
            Self::Full(gram) => gram.row(i, buf),
            Self::Compact(k) => &k[i * m..(i + 1) * m],
            Self::Mapped(gram, idx) => {
                let mut full = Vec::new();
                let row = gram.row(idx[i], &mut full);
                buf.clear();
                buf.extend(idx.iter().map(|&j| row[j]));
                buf
            }
        }
    }
}

/// `m(α)`, `M(α)` and the gap at the last working-set selection.
struct Selection {
    gmax: f64,
    gmin: f64,
    gap: f64,
    /// False when no pair can make progress.
    has_pair: bool,
}

/// At most `limit` SMO updates on the problem held by `rows`; returns the
/// number of updates made and the final selection.
#[allow(clippy::too_many_arguments)]
fn smo_phase(
    rows: &ActiveRows,
    y: &[f64],
    diag: &[f64],
    alpha: &mut [f64],
    grad: &mut [f64],
    c: f64,
    tol: f64,
    limit: usize,
) -> (usize, Selection) {
    let m = y.len();
    const UP: u8 = 1;
    const LOW: u8 = 2;
    let state = |a: f64, yt: f64| -> u8 {
        let (up, low) = if yt > 0.0 { (a < c, a > 0.0) } else { (a > 0.0, a < c) };
        (u8::from(up) * UP) | (u8::from(low) * LOW)
    };
    let mut flags: Vec<u8> = alpha.iter().zip(y).map(|(&a, &yt)| state(a, yt)).collect();
    let (mut buf_i, mut buf_j) = (Vec::new(), Vec::new());
    let mut done = 0;
    loop {
        // i: maximal violator in I_up. The loops select with values rather
        // than branches since membership follows the labels and is
        // unpredictable.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..m {
            let v = if flags[t] & UP != 0 { -y[t] * grad[t] } else { f64::NEG_INFINITY };
            if v > gmax {
                gmax = v;
                i = t;
            }
        }

        // j: second-order choice in I_low; track M(α) alongside.
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        if i != usize::MAX {
            let ki = rows.row(i, m, &mut buf_i);
            let di = diag[i];
            let mut best = (0.0, 1.0);
            for t in 0..m {
                let v = if flags[t] & LOW != 0 { -y[t] * grad[t] } else { f64::INFINITY };
                gmin = gmin.min(v);
                let diff = (gmax - v).max(0.0);
                let quad = (di + diag[t] - 2.0 * ki[t]).max(TAU);
                // Maximize diff² / quad without dividing.
                let gain = diff * diff;
                if gain * best.1 > best.0 * quad {
                    best = (gain, quad);
                    j = t;
                }
            }
        }
        let sel = Selection {
            gmax,
            gmin,
            gap: if i == usize::MAX { 0.0 } else { gmax - gmin },
            has_pair: j != usize::MAX,
        };
        if sel.gap <= tol || !sel.has_pair || done == limit {
            return (done, sel);
        }
        done += 1;

        let ki = rows.row(i, m, &mut buf_i);
        let kj = rows.row(j, m, &mut buf_j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * ki[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        flags[i] = state(alpha[i], y[i]);
        flags[j] = state(alpha[j], y[j]);
        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..m {
            grad[t] += y[t] * (di * ki[t] + dj * kj[t]);
        }
    }
}

/// `m(α) − M(α)` over every row.
fn full_gap(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for ((&yt, &a), &g) in y.iter().zip(alpha).zip(grad) {
        let v = -yt * g;
        if if yt > 0.0 { a < c } else { a > 0.0 } {
            gmax = gmax.max(v);
        }
        if if yt > 0.0 { a > 0.0 } else { a < c } {
            gmin = gmin.min(v);
        }
    }
    (gmax - gmin).max(0.0)
}

const IPM_MAX_ITER: usize = 80;

/// Near-optimal starting multipliers from a primal-dual interior-point
/// method (Mehrotra predictor-corrector) on the dual.
///
/// With `Z = diag(y) X` the Hessian is `Z Zᵀ`, so each Newton system
/// `(D + Z Zᵀ) v = h` is solved through the Woodbury identity with one
/// `d × d` Cholesky factorization: `O(n d²)` per iteration however
/// degenerate the problem. Multipliers next to a bound are snapped onto it
/// and `Σ αᵢ yᵢ = 0` is restored on the free ones. Returns `None` when the
/// factorization fails or `d ≥ n`; SMO then starts from zero.
fn interior_start(x: &Matrix, y: &[f64], c: f64) -> Option<Vec<f64>> {
    let (n, d) = (x.rows(), x.cols());
    if d >= n || !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return None;
    }
    let mut z = DMatrix::from_row_slice(n, d, x.as_slice());
    for (t, &yt) in y.iter().enumerate() {
        z.row_mut(t).scale_mut(yt);
    }
    let yv = DVector::from_column_slice(y);
    let mut a = DVector::from_element(n, c / 2.0);
    let mut lam = 0.0;
    let mut zl = DVector::from_element(n, 1.0);
    let mut zu = DVector::from_element(n, 1.0);
    let scale = c.max(1.0);

    for _ in 0..IPM_MAX_ITER {
        let s = a.map(|v| c - v);
        let qa = &z * (z.transpose() * &a);
        let r_d = &qa - DVector::from_element(n, 1.0) - &yv * lam - &zl + &zu;
        let r_p = yv.dot(&a);
        let mu = (a.dot(&zl) + s.dot(&zu)) / (2 * n) as f64;
        // SMO finishes the job, so stop once complementarity is negligible
        // and the residuals are small; the Woodbury solves lose accuracy
        // as D grows extreme, so pushing further gains nothing.
        let feasible = r_d.amax() <= 1e-6 * scale && r_p.abs() <= 1e-8 * scale;
        if (mu <= 1e-12 * scale && feasible) || mu <= 1e-15 * scale {
            break;
        }

        let dinv = DVector::from_iterator(n, (0..n).map(|t| 1.0 / (zl[t] / a[t] + zu[t] / s[t])));
        let mut zs = z.clone();
        for t in 0..n {
            zs.row_mut(t).scale_mut(dinv[t].sqrt());
        }
        let mut schur = zs.transpose() * &zs;
        for k in 0..d {
            schur[(k, k)] += 1.0;
        }
        let chol = schur.cholesky()?;
        // (D + Z Zᵀ)⁻¹ v = D⁻¹v − D⁻¹Z S⁻¹ Zᵀ D⁻¹v with S = I + Zᵀ D⁻¹ Z.
        let solve = |v: &DVector<f64>| -> DVector<f64> {
            let t1 = v.component_mul(&dinv);
            let t3 = chol.solve(&(z.transpose() * &t1));
            t1 - (&z * t3).component_mul(&dinv)
        };
        let my = solve(&yv);
        let ymy = yv.dot(&my);
        let newton = |r_z: &DVector<f64>, r_u: &DVector<f64>| {
            let h = -&r_d + r_z.component_div(&a) - r_u.component_div(&s);
            let mh = solve(&h);
            let dl = (-r_p - yv.dot(&mh)) / ymy;
            let da = mh + &my * dl;
            let dz = (r_z - zl.component_mul(&da)).component_div(&a);
            let du = (r_u + zu.component_mul(&da)).component_div(&s);
            (da, dl, dz, du)
        };
        let max_step = |da: &DVector<f64>, dz: &DVector<f64>, du: &DVector<f64>| {
            let mut step: f64 = 1.0;
            for t in 0..n {
                if da[t] < 0.0 {
                    step = step.min(-a[t] / da[t]);
                } else if da[t] > 0.0 {
                    step = step.min(s[t] / da[t]);
                }
                if dz[t] < 0.0 {
                    step = step.min(-zl[t] / dz[t]);
                }
                if du[t] < 0.0 {
                    step = step.min(-zu[t] / du[t]);
                }
            }
            step
        };

        let (da, _, dz, du) = newton(&(-a.component_mul(&zl)), &(-s.component_mul(&zu)));
        let step = max_step(&da, &dz, &du);
        let mu_aff = ((&a + &da * step).dot(&(&zl + &dz * step)) + (&s - &da * step).dot(&(&zu + &du * step)))
            / (2 * n) as f64;
        let sigma = (mu_aff / mu).powi(3);
        let r_z = DVector::from_element(n, sigma * mu) - a.component_mul(&zl) - da.component_mul(&dz);
        let r_u = DVector::from_element(n, sigma * mu) - s.component_mul(&zu) + da.component_mul(&du);
        let (da, dl, dz, du) = newton(&r_z, &r_u);
        let step = (0.99 * max_step(&da, &dz, &du)).min(1.0);
        let next = &a + &da * step;
        if !(step.is_finite() && dl.is_finite() && next.iter().all(|v| v.is_finite())) {
            break;
        }
        a = next;
        lam += dl * step;
        zl += &dz * step;
        zu += &du * step;
    }

    let snap = 1e-9 * c;
    let mut alpha: Vec<f64> = a
        .iter()
        .map(|&v| if v < snap { 0.0 } else if v > c - snap { c } else { v })
        .collect();
    for _ in 0..4 {
        let excess: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        let free: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).collect();
        if excess == 0.0 || free.is_empty() {
            break;
        }
        let share = excess / free.len() as f64;
        for t in free {
            alpha[t] = (alpha[t] - share * y[t]).clamp(0.0, c);
        }
    }
    let excess: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
    (excess.abs() <= 1e-9 * c).then_some(alpha)
}

/// SMO with second-order working-set selection and shrinking, started from
/// the interior-point estimate.
///
/// Every `min(n, 1000)` updates, multipliers stuck at a bound that cannot
/// enter the next working set are set aside and the rest is solved on a
/// compact copy of its kernel block. Once the active problem meets `tol` the
/// gradient is rebuilt over all rows and the check repeated, so termination
/// is always judged on the full problem.
pub(crate) fn solve_dual(
    gram: &LinearGram,
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> DualSolution {
    let start = interior_start(gram.features(), y, c).unwrap_or_else(|| vec![0.0; gram.n()]);
    smo_from(gram, y, c, tol, max_iter, start)
}

fn smo_from(gram: &LinearGram, y: &[f64], c: f64, tol: f64, max_iter: usize, mut alpha: Vec<f64>) -> DualSolution {
    let n = gram.n();
    let x = gram.features();
    let mut grad = full_gradient(x, y, &alpha);
    let shrink_every = n.clamp(1, 1000);
    let mut active: Vec<usize> = (0..n).collect();
    let mut rows = ActiveRows::Full(gram);
    let mut iterations = 0;

    let gap = loop {
        let pick = |v: &[f64]| active.iter().map(|&t| v[t]).collect::<Vec<_>>();
        let (ya, diag) = (pick(y), pick(&gram.diag));
        let (mut a, mut g) = (pick(&alpha), pick(&grad));
        let limit = shrink_every.min(max_iter - iterations);
        let (done, sel) = smo_phase(&rows, &ya, &diag, &mut a, &mut g, c, tol, limit);
        iterations += done;
        for (p, &t) in active.iter().enumerate() {
            alpha[t] = a[p];
            grad[t] = g[p];
        }

        let settled = sel.gap <= tol || !sel.has_pair;
        if settled || iterations == max_iter {
            if active.len() == n {
                break sel.gap;
            }
            grad = full_gradient(x, y, &alpha);
            active = (0..n).collect();
            rows = ActiveRows::Full(gram);
            if settled {
                continue;
            }
            break full_gap(y, &alpha, &grad, c);
        }

        // A bounded multiplier that is only an I_up member below M, or only
        // an I_low member above m, cannot be picked next.
        let before = active.len();
        active.retain(|&t| {
            let (ai, yt) = (alpha[t], y[t]);
            let up = if yt > 0.0 { ai < c } else { ai > 0.0 };
            let low = if yt > 0.0 { ai > 0.0 } else { ai < c };
            let v = -yt * grad[t];
            match (up, low) {
                (true, false) => v >= sel.gmin,
                (false, true) => v <= sel.gmax,
                _ => true,
            }
        });
        if active.len() != before {
            rows = ActiveRows::new(gram, &active);
        }
    };

    DualSolution {
        b: bias(&alpha, &grad, y, c),
        converged: gap <= tol,
        alpha,
        iterations,
        gap,
    }
}

/// Bias from the free multipliers, or the midpoint of the feasible interval
/// when every multiplier sits at a bound.
fn bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    };
    -rho
}

pub(crate) fn validate_params(params: &SvmParams) -> Result<()> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", params.tol)));
    }
    Ok(())
}

pub(crate) fn recover_weights(x: &Matrix, y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; x.cols()];
    for (i, row) in x.iter_rows().enumerate() {
        let coef = alpha[i] * y[i];
        if coef != 0.0 {
            for (wj, xj) in w.iter_mut().zip(row) {
                *wj += coef * xj;
            }
        }
    }
    w
}

pub(crate) fn model_from_solution(x: &Matrix, y: &[f64], c: f64, sol: DualSolution) -> SvmModel {
    let w = recover_weights(x, y, &sol.alpha);
    let norm = dot(&w, &w).sqrt();
    SvmModel {
        margin: (norm > 0.0).then(|| 2.0 / norm),
        w,
        b: sol.b,
        c,
        alpha: sol.alpha,
        converged: sol.converged,
        iterations: sol.iterations,
        kkt_gap: sol.gap,
    }
}

pub fn svm_fit(x: &Matrix, y: &LabelVector, params: &SvmParams) -> Result<SvmModel> {
    check_fit_inputs(x, y)?;
    validate_params(params)?;
    if x.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: x.rows(),
        });
    }
    let ys: Vec<f64> = y.labels.iter().map(|l| l.sign()).collect();
    let max_iter = params.update_budget(x.rows());
    let gram = LinearGram::new(x.clone());
    let sol = solve_dual(&gram, &ys, params.c, params.tol, max_iter);
    Ok(model_from_solution(x, &ys, params.c, sol))
}

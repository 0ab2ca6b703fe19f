//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survey_ml::classifiers::forest::{ForestModel, Node};
use survey_ml::data_model::{Label, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- SVM ----

pub fn primal(w: &[f64], b: f64, c: f64, x: &Matrix, y: &[f64]) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(r, yi)| {
            let f: f64 = r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// The best bias for a fixed `w`: the hinge sum is convex piecewise linear
/// in `b` with kinks at `y_i − w·x_i`, so one of those is optimal.
pub fn best_bias(w: &[f64], c: f64, x: &Matrix, y: &[f64]) -> f64 {
    let wx: Vec<f64> = x
        .iter_rows()
        .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect();
    let cost = |b: f64| -> f64 { wx.iter().zip(y).map(|(f, yi)| (1.0 - yi * (f + b)).max(0.0)).sum::<f64>() * c };
    let mut best = (f64::INFINITY, 0.0);
    for (f, yi) in wx.iter().zip(y) {
        let b = yi - f;
        let v = cost(b);
        if v < best.0 {
            best = (v, b);
        }
    }
    best.1
}

fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * out[k]).sum();
        out[r] = (rhs[r] - s) / a[r][r];
    }
    Some(out)
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for size in 1..=k.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Exact optimum of `½‖w‖² + C Σ ξ` by enumerating dual partitions: a free
/// set `F` (0 < α < C, at most d + 1 points for data in general position),
/// a bound set `V` (α = C), the rest at 0. Each partition's KKT system is
/// solved directly; every feasible candidate is a primal point, so the
/// smallest primal value found is the optimum. Returns `(value, w)`.
pub fn svm_qp_oracle(x: &Matrix, y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = x.rows();
    let d = x.cols();
    let k = |i: usize, j: usize| -> f64 { x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum() };
    let mut best = (f64::INFINITY, vec![0.0; d]);
    for free in subsets_up_to(n, d + 1) {
        let rest: Vec<usize> = (0..n).filter(|i| !free.contains(i)).collect();
        for mask in 0u32..(1 << rest.len()) {
            let bound: Vec<usize> = (0..rest.len())
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| rest[b])
                .collect();
            let m = free.len();
            let alpha_f = if m == 0 {
                Vec::new()
            } else {
                let mut a = vec![vec![0.0; m + 1]; m + 1];
                let mut rhs = vec![0.0; m + 1];
                for (r, &i) in free.iter().enumerate() {
                    for (s, &j) in free.iter().enumerate() {
                        a[r][s] = y[i] * y[j] * k(i, j);
                    }
                    a[r][m] = y[i];
                    rhs[r] = 1.0 - c * bound.iter().map(|&j| y[i] * y[j] * k(i, j)).sum::<f64>();
                }
                for (s, &j) in free.iter().enumerate() {
                    a[m][s] = y[j];
                }
                rhs[m] = -c * bound.iter().map(|&j| y[j]).sum::<f64>();
                match solve(a, rhs) {
                    Some(sol) => sol[..m].to_vec(),
                    None => continue,
                }
            };
            if alpha_f.iter().any(|&a| a < -1e-9 || a > c + 1e-9) {
                continue;
            }
            let mut w = vec![0.0; d];
            for (a, &i) in alpha_f.iter().zip(&free) {
                for (wj, xj) in w.iter_mut().zip(x.row(i)) {
                    *wj += a * y[i] * xj;
                }
            }
            for &i in &bound {
                for (wj, xj) in w.iter_mut().zip(x.row(i)) {
                    *wj += c * y[i] * xj;
                }
            }
            let b = best_bias(&w, c, x, y);
            let v = primal(&w, b, c, x, y);
            if v < best.0 {
                best = (v, w);
            }
        }
    }
    best
}

/// Largest KKT violation of a model, measured on the margins
/// `y_i (w·x_i + b)` against each multiplier's state.
pub fn kkt_violation(w: &[f64], b: f64, alpha: &[f64], c: f64, x: &Matrix, y: &[f64]) -> f64 {
    let eps = 1e-8 * c;
    x.iter_rows()
        .zip(y)
        .zip(alpha)
        .map(|((r, yi), &a)| {
            let m = yi * (r.iter().zip(w).map(|(p, q)| p * q).sum::<f64>() + b);
            if a <= eps {
                (1.0 - m).max(0.0)
            } else if a >= c - eps {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// A small random instance with both classes present.
pub fn svm_instance(seed: u64, n: usize, d: usize) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    let shift: f64 = r.random_range(0.0..2.5);
    loop {
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let yi = if r.random::<bool>() { 1.0 } else { -1.0 };
            let row: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0) + yi * shift * 0.5).collect();
            rows.push(row);
            y.push(yi);
        }
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return (Matrix::from_rows(&rows).unwrap(), y);
        }
    }
}

// ---------------------------------------------------------- eigenvalues ----

/// Eigenvalues of `[[a, b], [b, c]]`, ascending.
pub fn eig2(a: i64, b: i64, c: i64) -> [f64; 2] {
    let mean = (a + c) as f64 / 2.0;
    let disc = ((a - c) * (a - c) + 4 * b * b) as f64;
    let r = disc.sqrt() / 2.0;
    [mean - r, mean + r]
}

/// Eigenvalues of a symmetric integer 3×3 matrix from its characteristic
/// polynomial `λ³ − t λ² + s λ − det`, ascending.
///
/// The integer discriminant decides exactly whether a root repeats; a
/// repeated root of a monic integer cubic is an integer, found by search.
/// Distinct roots come from the trigonometric form and are polished with
/// Newton steps on the exact-coefficient polynomial.
pub fn eig3(m: [[i64; 3]; 3]) -> [f64; 3] {
    let t = m[0][0] + m[1][1] + m[2][2];
    let s = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[1][0]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // p(λ) = λ³ + a λ² + b λ + c
    let (a, b, c) = (-t, s, -det);
    let disc = 18 * a * b * c - 4 * a * a * a * c + a * a * b * b - 4 * b * b * b - 27 * c * c;
    let p = |x: f64| ((x + a as f64) * x + b as f64) * x + c as f64;
    let dp = |x: f64| (3.0 * x + 2.0 * a as f64) * x + b as f64;

    let mut roots = if disc == 0 {
        let ip = |x: i64| ((x + a) * x + b) * x + c;
        let idp = |x: i64| (3 * x + 2 * a) * x + b;
        let rep = (-20i64..=20)
            .find(|&x| ip(x) == 0 && idp(x) == 0)
            .expect("a repeated root of a monic integer cubic is an integer");
        let other = t - 2 * rep;
        [rep as f64, rep as f64, other as f64]
    } else {
        let q = t as f64 / 3.0;
        let p2 = ((m[0][0] as f64 - q).powi(2)
            + (m[1][1] as f64 - q).powi(2)
            + (m[2][2] as f64 - q).powi(2)
            + 2.0 * ((m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2]) as f64))
            / 6.0;
        let pp = p2.sqrt();
        // det((A − qI)/pp) / 2, expanded through the polynomial: p(q) = −det(A − qI).
        let r = (-p(q) / (pp * pp * pp) / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut x = q + 2.0 * pp * (phi + 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            for _ in 0..50 {
                let g = dp(x);
                if g == 0.0 {
                    break;
                }
                let step = p(x) / g;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            *o = x;
        }
        out
    };
    roots.sort_by(f64::total_cmp);
    roots
}

// ------------------------------------------------------------------ KNN ----

/// Majority label among the `k` nearest rows by full sort on (squared
/// Euclidean distance, row index).
pub fn knn_oracle(train: &Matrix, y: &[Label], k: usize, q: &[f64]) -> Label {
    let mut d: Vec<(f64, usize)> = train
        .iter_rows()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let pos = d[..k].iter().filter(|(_, i)| y[*i] == Label::Positive).count();
    if 2 * pos > k {
        Label::Positive
    } else {
        Label::Negative
    }
}

// --------------------------------------------------------------- forest ----

/// Positive-class posterior recomputed by walking each tree's node table.
pub fn forest_walk(model: &ForestModel, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for tree in &model.trees {
        let mut node = &tree.nodes[0];
        let (p, n) = loop {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = &tree.nodes[if x[feature] <= threshold { left } else { right }],
                Node::Leaf { positive, negative } => break (positive, negative),
            }
        };
        total += p as f64 / (p + n) as f64;
    }
    total / model.trees.len() as f64
}

// ---------------------------------------------------------------- stumps ----

/// Best accuracy of any one-threshold rule `sign(±(x − t))` on one column,
/// found by trying every cut between sorted values.
pub fn stump_accuracy(col: &[f64], y: &[Label]) -> f64 {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let total_pos = y.iter().filter(|&&l| l == Label::Positive).count();
    // Rule "x > t → +1": correct = negatives at or below the cut + positives above it.
    let mut best = total_pos.max(n - total_pos);
    let mut neg_below = 0;
    let mut pos_below = 0;
    for (rank, &i) in order.iter().enumerate() {
        if y[i] == Label::Positive {
            pos_below += 1;
        } else {
            neg_below += 1;
        }
        if rank + 1 < n && col[order[rank + 1]] == col[i] {
            continue;
        }
        let up = neg_below + (total_pos - pos_below);
        best = best.max(up).max(n - up);
    }
    best as f64 / n as f64
}

//! Splitting, scoring and the per-algorithm comparison report.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, Algorithm, ModelParams};
use crate::data_model::{EncodedMatrix, Label, LabelVector};
use crate::error::{Error, Result};
use crate::ingest::ReductionLedger;

pub const DEFAULT_TEST_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

fn check_lengths(predicted: &[Label], truth: &[Label]) -> Result<()> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    Ok(())
}

pub fn accuracy(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts with `+1` as the positive class.
pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    check_lengths(predicted, truth)?;
    let mut m = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        match (p, t) {
            (Label::Positive, Label::Positive) => m.tp += 1,
            (Label::Positive, Label::Negative) => m.fp += 1,
            (Label::Negative, Label::Negative) => m.tn += 1,
            (Label::Negative, Label::Positive) => m.fn_ += 1,
        }
    }
    Ok(m)
}

fn class_indices(labels: &LabelVector) -> [(Label, Vec<usize>); 2] {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, l) in labels.labels.iter().enumerate() {
        match l {
            Label::Positive => pos.push(i),
            Label::Negative => neg.push(i),
        }
    }
    [(Label::Positive, pos), (Label::Negative, neg)]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified holdout: each class contributes `round(count · test_fraction)`
/// shuffled members to the test set. Both index lists are returned sorted.
pub fn stratified_split(labels: &LabelVector, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in class_indices(labels) {
        let count = idx.len();
        let n_test = (count as f64 * test_fraction).round() as usize;
        if count < 2 || n_test == 0 || n_test == count {
            return Err(Error::ClassTooSmall {
                label: label.as_i8(),
                count,
            });
        }
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Stratified k folds: each class is shuffled and dealt round-robin, with the
/// dealing position carried from one class to the next so fold totals stay
/// balanced too.
pub fn stratified_kfold(labels: &LabelVector, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (label, mut idx) in class_indices(labels) {
        if idx.len() < k {
            return Err(Error::ClassTooSmall {
                label: label.as_i8(),
                count: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitSpec {
    Holdout { test_fraction: f64 },
    Kfold { k: usize },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Holdout {
            test_fraction: DEFAULT_TEST_FRACTION,
        }
    }
}

impl SplitSpec {
    pub fn describe(&self) -> String {
        match self {
            SplitSpec::Holdout { test_fraction } => format!(
                "stratified holdout, {:.0}% train / {:.0}% test",
                (1.0 - test_fraction) * 100.0,
                test_fraction * 100.0
            ),
            SplitSpec::Kfold { k } => format!("stratified {k}-fold cross-validation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEntry {
    pub name: Algorithm,
    pub display_name: String,
    pub params: ModelParams,
    pub seed: u64,
    pub accuracy: Option<f64>,
    /// Percentage to two decimals, e.g. `"92.31%"`.
    pub accuracy_percent: Option<String>,
    pub confusion: Option<ConfusionMatrix>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub spec: SplitSpec,
    pub description: String,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub task: String,
    pub seed: u64,
    pub rows: usize,
    pub features: Vec<String>,
    pub ledger: Option<ReductionLedger>,
    pub split: SplitReport,
    pub algorithms: Vec<AlgorithmEntry>,
}

impl ComparisonReport {
    pub fn entry(&self, algorithm: Algorithm) -> Option<&AlgorithmEntry> {
        self.algorithms.iter().find(|e| e.name == algorithm)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

pub fn format_percent(accuracy: f64) -> String {
    format!("{:.2}%", accuracy * 100.0)
}

fn score_on(
    x: &EncodedMatrix,
    y: &LabelVector,
    params: &ModelParams,
    train: &[usize],
    test: &[usize],
) -> Result<ConfusionMatrix> {
    let model = classifiers::fit(&x.select_rows(train), &y.select(train), params)?;
    let test_x = x.values.select_rows(test);
    let predicted = model.predict_all(&test_x)?;
    confusion(&predicted, &y.select(test).labels)
}

/// Trains and scores every requested algorithm. Entries come back in the
/// fixed order KNN, RF, SVM, NB; a failing algorithm records its error
/// without affecting the others.
pub fn compare_algorithms(
    task: &str,
    x: &EncodedMatrix,
    y: &LabelVector,
    algorithms: &[ModelParams],
    split: &SplitSpec,
    seed: u64,
) -> Result<ComparisonReport> {
    if algorithms.is_empty() {
        return Err(Error::InvalidParameter("no algorithms requested".into()));
    }
    let mut requested = algorithms.to_vec();
    requested.sort_by_key(ModelParams::algorithm);
    if requested.windows(2).any(|w| w[0].algorithm() == w[1].algorithm()) {
        return Err(Error::InvalidParameter("an algorithm was requested twice".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            got: y.len(),
        });
    }

    let (folds, split_report): (Vec<(Vec<usize>, Vec<usize>)>, SplitReport) = match *split {
        SplitSpec::Holdout { test_fraction } => {
            let s = stratified_split(y, test_fraction, seed)?;
            let report = SplitReport {
                spec: *split,
                description: split.describe(),
                train_rows: s.train.len(),
                test_rows: s.test.len(),
            };
            (vec![(s.train, s.test)], report)
        }
        SplitSpec::Kfold { k } => {
            let folds = stratified_kfold(y, k, seed)?;
            let pairs = (0..k)
                .map(|f| {
                    let train = folds
                        .iter()
                        .enumerate()
                        .filter(|&(g, _)| g != f)
                        .flat_map(|(_, idx)| idx.iter().copied())
                        .collect::<Vec<_>>();
                    let mut train = train;
                    train.sort_unstable();
                    (train, folds[f].clone())
                })
                .collect();
            let report = SplitReport {
                spec: *split,
                description: split.describe(),
                train_rows: y.len() - y.len() / k,
                test_rows: y.len(),
            };
            (pairs, report)
        }
    };

    let entries = requested
        .par_iter()
        .map(|params| {
            let outcome = folds.iter().try_fold(ConfusionMatrix::default(), |mut acc, (tr, te)| {
                acc.add(&score_on(x, y, params, tr, te)?);
                Ok::<_, Error>(acc)
            });
            let algorithm = params.algorithm();
            let mut entry = AlgorithmEntry {
                name: algorithm,
                display_name: algorithm.to_string(),
                params: *params,
                seed,
                accuracy: None,
                accuracy_percent: None,
                confusion: None,
                error: None,
            };
            match outcome {
                Ok(c) => {
                    let acc = c.accuracy();
                    entry.accuracy = Some(acc);
                    entry.accuracy_percent = Some(format_percent(acc));
                    entry.confusion = Some(c);
                }
                Err(e) => entry.error = Some(e.to_string()),
            }
            entry
        })
        .collect();

    Ok(ComparisonReport {
        task: task.to_string(),
        seed,
        rows: x.n_rows(),
        features: x.column_names(),
        ledger: None,
        split: split_report,
        algorithms: entries,
    })
}

//! The four binary classifiers and the shared fit/predict surface.

pub mod bayes;
pub mod forest;
pub mod knn;
pub mod svm;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bayes::{nb_fit, BayesModel, BayesParams};
pub use forest::{rf_fit, ForestModel, ForestParams};
pub use knn::{knn_fit, KnnModel, KnnParams, Metric};
pub use svm::{svm_fit, SvmModel, SvmParams};

use crate::data_model::{EncodedMatrix, Label, LabelVector, Matrix};
use crate::error::{Error, Result};

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        })
    }
}

pub(crate) fn check_fit_inputs(x: &Matrix, y: &LabelVector) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if !y.has_both_classes() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Algorithms in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Knn,
    #[serde(rename = "rf")]
    RandomForest,
    Svm,
    #[serde(rename = "nb")]
    NaiveBayes,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Knn,
        Algorithm::RandomForest,
        Algorithm::Svm,
        Algorithm::NaiveBayes,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::RandomForest => "rf",
            Algorithm::Svm => "svm",
            Algorithm::NaiveBayes => "nb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Some(Algorithm::Knn),
            "rf" | "random_forest" | "forest" => Some(Algorithm::RandomForest),
            "svm" => Some(Algorithm::Svm),
            "nb" | "naive_bayes" | "bayes" => Some(Algorithm::NaiveBayes),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Knn => "KNN",
            Algorithm::RandomForest => "Random Forest",
            Algorithm::Svm => "SVM",
            Algorithm::NaiveBayes => "Naive Bayes",
        })
    }
}

/// Hyperparameters for one algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ModelParams {
    Knn(KnnParams),
    #[serde(rename = "rf")]
    RandomForest(ForestParams),
    Svm(SvmParams),
    #[serde(rename = "nb")]
    NaiveBayes(BayesParams),
}

impl ModelParams {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            ModelParams::Knn(_) => Algorithm::Knn,
            ModelParams::RandomForest(_) => Algorithm::RandomForest,
            ModelParams::Svm(_) => Algorithm::Svm,
            ModelParams::NaiveBayes(_) => Algorithm::NaiveBayes,
        }
    }
}

/// A fitted model; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum TrainedModel {
    Knn(KnnModel),
    #[serde(rename = "rf")]
    RandomForest(ForestModel),
    Svm(SvmModel),
    #[serde(rename = "nb")]
    NaiveBayes(BayesModel),
}

pub fn fit(x: &EncodedMatrix, y: &LabelVector, params: &ModelParams) -> Result<TrainedModel> {
    Ok(match params {
        ModelParams::Knn(p) => TrainedModel::Knn(knn_fit(&x.values, y, p)?),
        ModelParams::RandomForest(p) => TrainedModel::RandomForest(rf_fit(&x.values, y, p)?),
        ModelParams::Svm(p) => TrainedModel::Svm(svm_fit(&x.values, y, p)?),
        ModelParams::NaiveBayes(p) => {
            TrainedModel::NaiveBayes(nb_fit(&x.values, y, &x.column_meta, p)?)
        }
    })
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::Knn(_) => Algorithm::Knn,
            TrainedModel::RandomForest(_) => Algorithm::RandomForest,
            TrainedModel::Svm(_) => Algorithm::Svm,
            TrainedModel::NaiveBayes(_) => Algorithm::NaiveBayes,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::RandomForest(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::NaiveBayes(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, x: &Matrix) -> Result<Vec<Label>> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

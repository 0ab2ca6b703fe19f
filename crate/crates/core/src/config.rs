//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! task = "malaria"            # anemia | malaria | custom
//! seed = 7                    # required
//! schema = "schema.toml"      # optional for anemia/malaria (bundled schema)
//! output = "report.json"
//!
//! [input]
//! csv = "survey.csv"          # or an [input.synth] table
//!
//! [preprocess]
//! sparse_threshold = 0.5
//! standardize_numeric = true
//!
//! [select]
//! correlation_threshold = 0.75
//! rfe = { keep = 12 }         # or { remove = 10 }; one of the two is required
//! pca = { variance = 0.95 }   # or components = k, drop = k, enabled = false
//!
//! [split]
//! kind = "holdout"            # or kind = "kfold", k = 10
//! test_fraction = 0.25
//!
//! [algorithms]
//! enabled = ["knn", "rf", "svm", "nb"]
//! svm = { c = 10.0 }
//! ```

use serde::{Deserialize, Serialize};

use crate::classifiers::{Algorithm, BayesParams, ForestParams, KnnParams, ModelParams, SvmParams};
use crate::error::{Error, Result};
use crate::evaluation::SplitSpec;
use crate::feature_select::{DEFAULT_CORRELATION_THRESHOLD, DEFAULT_VARIANCE_TARGET};
use crate::fixtures::{ReductionProfile, ANEMIA_REDUCTION, MALARIA_REDUCTION};
use crate::ingest::DEFAULT_SPARSE_THRESHOLD;
use crate::synthgen::SignalSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Anemia,
    Malaria,
    Custom,
}

impl Task {
    pub fn key(self) -> &'static str {
        match self {
            Task::Anemia => "anemia",
            Task::Malaria => "malaria",
            Task::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "anemia" => Some(Task::Anemia),
            "malaria" => Some(Task::Malaria),
            "custom" => Some(Task::Custom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthInput {
    pub rows: usize,
    /// Use the planted schema `x1..xN` + `label` instead of a schema file.
    pub columns: Option<usize>,
    pub signal: SignalSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub csv: Option<String>,
    pub synth: Option<SynthInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub sparse_threshold: f64,
    pub standardize_numeric: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
            standardize_numeric: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub keep: Option<usize>,
    pub remove: Option<usize>,
    pub c: f64,
    pub tol: f64,
}

impl Default for RfeConfig {
    fn default() -> Self {
        let svm = SvmParams::default();
        Self {
            keep: None,
            remove: None,
            c: svm.c,
            tol: svm.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaConfig {
    pub enabled: bool,
    pub variance: f64,
    pub components: Option<usize>,
    pub drop: Option<usize>,
    pub standardize: bool,
}

impl Default for PcaConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            variance: DEFAULT_VARIANCE_TARGET,
            components: None,
            drop: None,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    pub correlation_threshold: f64,
    pub rfe: RfeConfig,
    pub pca: PcaConfig,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
            rfe: RfeConfig::default(),
            pca: PcaConfig::default(),
        }
    }
}

/// Forest settings; an unset seed falls back to the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub features_per_split: Option<usize>,
    pub min_split: usize,
    pub bootstrap: bool,
    pub seed: Option<u64>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        let p = ForestParams::default();
        Self {
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            features_per_split: p.features_per_split,
            min_split: p.min_split,
            bootstrap: p.bootstrap,
            seed: None,
        }
    }
}

impl ForestConfig {
    pub fn params(&self, run_seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            features_per_split: self.features_per_split,
            min_split: self.min_split,
            bootstrap: self.bootstrap,
            seed: self.seed.unwrap_or(run_seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmsConfig {
    pub enabled: Vec<Algorithm>,
    pub knn: KnnParams,
    pub rf: ForestConfig,
    pub svm: SvmParams,
    pub nb: BayesParams,
}

impl Default for AlgorithmsConfig {
    fn default() -> Self {
        Self {
            enabled: Algorithm::ALL.to_vec(),
            knn: KnnParams::default(),
            rf: ForestConfig::default(),
            svm: SvmParams::default(),
            nb: BayesParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub schema: Option<String>,
    pub output: Option<String>,
    pub input: InputConfig,
    pub preprocess: PreprocessConfig,
    pub select: SelectConfig,
    pub split: SplitSpec,
    pub algorithms: AlgorithmsConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    /// Keep only these algorithms (empty = no filter).
    pub algorithms: Vec<Algorithm>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn in_unit(name: &str, v: f64, lo_open: bool) -> Result<()> {
    let ok = if lo_open { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(())
    } else {
        let range = if lo_open { "(0, 1]" } else { "[0, 1]" };
        Err(invalid(format!("{name} must be in {range}, got {v}")))
    }
}

fn nonempty(name: &str, path: &Option<String>) -> Result<()> {
    match path {
        Some(p) if p.trim().is_empty() => Err(invalid(format!("{name} must not be empty"))),
        _ => Ok(()),
    }
}

/// Parses without the completeness checks, so overrides can still fill in
/// the task or seed.
pub fn parse_config_unchecked(text: &str) -> Result<PipelineConfig> {
    toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => Error::ConfigSyntax {
            line: line_of(text, span.start),
            message: e.message().to_string(),
        },
        None => invalid(e.message()),
    })
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let c = parse_config_unchecked(text)?;
    c.validate()?;
    Ok(c)
}

impl PipelineConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if o.task.is_some() {
            self.task = o.task;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.output.is_some() {
            self.output.clone_from(&o.output);
        }
        if !o.algorithms.is_empty() {
            self.algorithms.enabled.retain(|a| o.algorithms.contains(a));
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn task(&self) -> Result<Task> {
        self.task.ok_or_else(|| invalid("`task` is required"))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| invalid("`seed` is required (no clock-based seeding)"))
    }

    /// Hyperparameters of the enabled algorithms, in report order.
    pub fn model_params(&self) -> Result<Vec<ModelParams>> {
        let seed = self.seed()?;
        let a = &self.algorithms;
        let mut out: Vec<ModelParams> = a
            .enabled
            .iter()
            .map(|alg| match alg {
                Algorithm::Knn => ModelParams::Knn(a.knn),
                Algorithm::RandomForest => ModelParams::RandomForest(a.rf.params(seed)),
                Algorithm::Svm => ModelParams::Svm(a.svm),
                Algorithm::NaiveBayes => ModelParams::NaiveBayes(a.nb),
            })
            .collect();
        out.sort_by_key(ModelParams::algorithm);
        Ok(out)
    }

    /// Full check: settings plus schema and input references.
    pub fn validate(&self) -> Result<()> {
        self.validate_settings()?;
        let task = self.task()?;
        nonempty("schema", &self.schema)?;
        nonempty("input.csv", &self.input.csv)?;

        match (&self.input.csv, &self.input.synth) {
            (Some(_), Some(_)) => return Err(invalid("give either input.csv or input.synth, not both")),
            (None, None) => return Err(invalid("an input is required (input.csv or input.synth)")),
            _ => {}
        }
        if let Some(s) = &self.input.synth {
            if s.rows == 0 {
                return Err(invalid("input.synth.rows must be at least 1"));
            }
            match s.columns {
                Some(0) => return Err(invalid("input.synth.columns must be at least 1")),
                Some(_) if self.schema.is_some() || task != Task::Custom => {
                    return Err(invalid(
                        "input.synth.columns (planted schema) needs task = \"custom\" and no schema path",
                    ))
                }
                _ => {}
            }
        }
        let planted = self.input.synth.as_ref().is_some_and(|s| s.columns.is_some());
        if task == Task::Custom && self.schema.is_none() && !planted {
            return Err(invalid("task \"custom\" needs a schema path"));
        }
        Ok(())
    }

    /// Checks everything except where the schema and data come from.
    pub fn validate_settings(&self) -> Result<()> {
        self.seed()?;
        self.task()?;
        nonempty("output", &self.output)?;
        in_unit("preprocess.sparse_threshold", self.preprocess.sparse_threshold, false)?;
        let sel = &self.select;
        in_unit("select.correlation_threshold", sel.correlation_threshold, false)?;
        match (sel.rfe.keep, sel.rfe.remove) {
            (Some(_), Some(_)) => return Err(invalid("select.rfe takes keep or remove, not both")),
            (None, None) => {
                return Err(invalid(
                    "select.rfe needs keep = <columns> or remove = <columns> (remove = 0 disables elimination)",
                ))
            }
            _ => {}
        }
        if sel.rfe.keep == Some(0) {
            return Err(invalid("select.rfe.keep must be at least 1"));
        }
        if !(sel.rfe.c > 0.0 && sel.rfe.c.is_finite()) || !(sel.rfe.tol > 0.0) {
            return Err(invalid("select.rfe.c and select.rfe.tol must be positive"));
        }
        in_unit("select.pca.variance", sel.pca.variance, true)?;
        if sel.pca.components.is_some() && sel.pca.drop.is_some() {
            return Err(invalid("select.pca takes components or drop, not both"));
        }
        if sel.pca.components == Some(0) {
            return Err(invalid("select.pca.components must be at least 1"));
        }

        match self.split {
            SplitSpec::Holdout { test_fraction } if !(test_fraction > 0.0 && test_fraction < 1.0) => {
                return Err(invalid(format!(
                    "split.test_fraction must be in (0, 1), got {test_fraction}"
                )))
            }
            SplitSpec::Kfold { k } if k < 2 => {
                return Err(invalid(format!("split.k must be at least 2, got {k}")))
            }
            _ => {}
        }

        let a = &self.algorithms;
        if a.enabled.is_empty() {
            return Err(invalid("no algorithms enabled"));
        }
        let mut sorted = a.enabled.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != a.enabled.len() {
            return Err(invalid("an algorithm is listed twice in algorithms.enabled"));
        }
        if a.knn.k == 0 || a.knn.k % 2 == 0 {
            return Err(invalid(format!("algorithms.knn.k must be odd, got {}", a.knn.k)));
        }
        if !(a.svm.c > 0.0 && a.svm.c.is_finite()) || !(a.svm.tol > 0.0) {
            return Err(invalid("algorithms.svm.c and algorithms.svm.tol must be positive"));
        }
        if a.rf.n_trees == 0 || a.rf.min_split < 2 || a.rf.max_depth == Some(0) || a.rf.features_per_split == Some(0) {
            return Err(invalid(
                "algorithms.rf needs n_trees ≥ 1, min_split ≥ 2, and positive max_depth/features_per_split",
            ));
        }
        if !(a.nb.laplace_alpha > 0.0) || !(a.nb.variance_floor > 0.0) {
            return Err(invalid("algorithms.nb.laplace_alpha and variance_floor must be positive"));
        }
        Ok(())
    }

    /// A config that reproduces a paper reduction profile: the RFE and PCA
    /// stages remove the profile's counts. Input is left for the caller.
    pub fn reproduction(task: Task, seed: u64) -> Self {
        let profile: ReductionProfile = match task {
            Task::Malaria => MALARIA_REDUCTION,
            _ => ANEMIA_REDUCTION,
        };
        let mut c = PipelineConfig {
            task: Some(task),
            seed: Some(seed),
            ..PipelineConfig::default()
        };
        c.select.rfe.remove = Some(profile.rfe);
        c.select.pca.drop = Some(profile.pca);
        c
    }
}

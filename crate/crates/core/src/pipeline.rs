//! End-to-end run: ingest, label, reduce, train and evaluate.

use std::fmt;
use std::path::Path;

use crate::classifiers::SvmParams;
use crate::config::{PipelineConfig, Task};
use crate::data_model::{EncodedMatrix, LabelRule, RawTable, Role, Schema};
use crate::error::{Error, Result};
use crate::evaluation::{compare_algorithms, ComparisonReport};
use crate::feature_select::{
    choose_components, correlation_filter, pca_fit, pca_transform, rfe_rank, rfe_select, RankerConfig,
};
use crate::fixtures::{anemia_schema, malaria_schema};
use crate::ingest::{
    drop_ignored_columns, drop_incomplete_rows, drop_sparse_columns, encode, parse_csv, standardize_columns,
    ReductionLedger, ReductionStage,
};
use crate::labeling::build_labels;
use crate::synthgen::{generate, planted_schema};

/// Where a run failed. The order is the order stages execute in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Config,
    Schema,
    Ingest,
    SparseDrop,
    RowDrop,
    Encode,
    Label,
    Correlation,
    Rfe,
    Pca,
    Evaluate,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Schema => "schema",
            Stage::Ingest => "ingest",
            Stage::SparseDrop => "sparse-drop",
            Stage::RowDrop => "row-drop",
            Stage::Encode => "encode",
            Stage::Label => "label",
            Stage::Correlation => "correlation",
            Stage::Rfe => "rfe",
            Stage::Pca => "pca",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.error)
    }
}

impl std::error::Error for PipelineError {}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError> {
        self.map_err(|error| PipelineError { stage, error })
    }
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn check_rule(task: Task, schema: &Schema) -> Result<()> {
    let fits = match task {
        Task::Anemia => matches!(schema.label_rule, LabelRule::Anemia { .. }),
        Task::Malaria => matches!(schema.label_rule, LabelRule::Malaria),
        Task::Custom => true,
    };
    if fits {
        Ok(())
    } else {
        Err(Error::InvalidSchema(format!(
            "label rule does not belong to task `{}`",
            task.key()
        )))
    }
}

/// The schema named by the config: a file, the planted synthetic schema, or
/// the bundled schema of the task.
pub fn load_schema(config: &PipelineConfig) -> Result<Schema> {
    let task = config.task()?;
    let schema = if let Some(path) = &config.schema {
        Schema::from_toml_validated(&read_file(path)?)?
    } else if let Some(d) = config.input.synth.as_ref().and_then(|s| s.columns) {
        planted_schema(d)
    } else {
        match task {
            Task::Anemia => anemia_schema(),
            Task::Malaria => malaria_schema(),
            Task::Custom => return Err(Error::Config("task \"custom\" needs a schema path".into())),
        }
    };
    check_rule(task, &schema)?;
    Ok(schema)
}

/// Reads or generates the raw table.
pub fn load_input(config: &PipelineConfig, schema: &Schema) -> Result<RawTable> {
    if let Some(path) = &config.input.csv {
        parse_csv(&read_file(path)?, schema)
    } else if let Some(s) = &config.input.synth {
        generate(schema, s.rows, &s.signal, config.seed()?).map(|(t, _)| t)
    } else {
        Err(Error::Config("no input configured".into()))
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> std::result::Result<ComparisonReport, PipelineError> {
    config.validate().at(Stage::Config)?;
    let schema = load_schema(config).at(Stage::Schema)?;
    let table = load_input(config, &schema).at(Stage::Ingest)?;
    run_on_table(config, table)
}

fn names(m: &EncodedMatrix, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&j| m.column_meta[j].name()).collect()
}

fn complement(n: usize, keep: &[usize]) -> Vec<usize> {
    (0..n).filter(|j| !keep.contains(j)).collect()
}

/// Runs every stage after ingest on an already loaded table.
pub fn run_on_table(config: &PipelineConfig, table: RawTable) -> std::result::Result<ComparisonReport, PipelineError> {
    config.validate_settings().at(Stage::Config)?;
    let task = config.task().at(Stage::Config)?;
    let seed = config.seed().at(Stage::Config)?;
    let initial = table
        .schema
        .variables
        .iter()
        .filter(|v| v.role != Role::LabelSource)
        .count();
    let mut ledger = ReductionLedger::new(initial);

    let (table, mut removed) = drop_ignored_columns(&table);
    let (table, sparse) = drop_sparse_columns(&table, config.preprocess.sparse_threshold);
    removed.extend(sparse);
    ledger
        .record(ReductionStage::SparseOrUnimportant, removed)
        .at(Stage::SparseDrop)?;

    let table = drop_incomplete_rows(&table);
    if table.n_rows() == 0 {
        return Err(Error::Empty).at(Stage::RowDrop);
    }

    let encoded = encode(&table, config.preprocess.standardize_numeric).at(Stage::Encode)?;
    let variables = table
        .schema
        .variables
        .iter()
        .filter(|v| v.role == Role::Feature)
        .count();
    ledger.record_encoding(variables, encoded.n_cols());
    if encoded.n_cols() == 0 {
        return Err(Error::Empty).at(Stage::Encode);
    }
    let labels = build_labels(&table).at(Stage::Label)?;

    let corr = correlation_filter(&encoded, config.select.correlation_threshold).at(Stage::Correlation)?;
    ledger
        .record(ReductionStage::Correlation, names(&encoded, &corr.removed))
        .at(Stage::Correlation)?;
    let encoded = encoded.select_columns(&corr.kept);

    let encoded = {
        let d = encoded.n_cols();
        let rfe = &config.select.rfe;
        let n_keep = match (rfe.keep, rfe.remove) {
            (Some(k), _) => Some(k.min(d)),
            (None, Some(r)) if r >= d => {
                return Err(Error::InvalidParameter(format!(
                    "RFE cannot remove {r} of {d} columns"
                )))
                .at(Stage::Rfe)
            }
            (None, Some(r)) => Some(d - r),
            (None, None) => {
                return Err(Error::Config("select.rfe needs keep or remove".into())).at(Stage::Config)
            }
        };
        match n_keep {
            Some(k) if k < d => {
                let ranker = RankerConfig {
                    svm: SvmParams {
                        c: rfe.c,
                        tol: rfe.tol,
                        max_passes: None,
                    },
                    standardize: true,
                };
                let ranking = rfe_rank(&encoded, &labels, &ranker).at(Stage::Rfe)?;
                let kept = rfe_select(&ranking, k).at(Stage::Rfe)?;
                ledger
                    .record(ReductionStage::Rfe, names(&encoded, &complement(d, &kept)))
                    .at(Stage::Rfe)?;
                encoded.select_columns(&kept)
            }
            _ => {
                ledger.record(ReductionStage::Rfe, Vec::new()).at(Stage::Rfe)?;
                encoded
            }
        }
    };

    let encoded = {
        let pca = &config.select.pca;
        if pca.enabled {
            let d = encoded.n_cols();
            let input = if pca.standardize {
                EncodedMatrix {
                    values: standardize_columns(&encoded.values),
                    column_meta: encoded.column_meta.clone(),
                }
            } else {
                encoded
            };
            let model = pca_fit(&input).at(Stage::Pca)?;
            let k = match (pca.components, pca.drop) {
                (Some(k), _) if k > d => {
                    return Err(Error::InvalidParameter(format!(
                        "cannot keep {k} components of {d} columns"
                    )))
                    .at(Stage::Pca)
                }
                (Some(k), _) => k,
                (None, Some(r)) if r >= d => {
                    return Err(Error::InvalidParameter(format!(
                        "PCA cannot drop {r} of {d} components"
                    )))
                    .at(Stage::Pca)
                }
                (None, Some(r)) => d - r,
                (None, None) => choose_components(&model, pca.variance).at(Stage::Pca)?,
            };
            let out = pca_transform(&model, &input, k).at(Stage::Pca)?;
            let dropped = (k..d).map(|i| format!("PC{}", i + 1)).collect();
            ledger.record(ReductionStage::Pca, dropped).at(Stage::Pca)?;
            out
        } else {
            ledger.record(ReductionStage::Pca, Vec::new()).at(Stage::Pca)?;
            encoded
        }
    };

    let params = config.model_params().at(Stage::Config)?;
    let mut report =
        compare_algorithms(task.key(), &encoded, &labels, &params, &config.split, seed).at(Stage::Evaluate)?;
    report.ledger = Some(ledger);
    Ok(report)
}

/// Writes the report as pretty JSON with a fixed key order.
pub fn emit_report(report: &ComparisonReport, path: &Path) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, report.to_json()).map_err(io)
}

pub fn read_report(path: &Path) -> Result<ComparisonReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ComparisonReport::from_json(&text)
}

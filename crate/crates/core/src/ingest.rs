//! CSV ingestion, pruning and numeric encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data_model::{
    Cell, ColumnMeta, ColumnTag, EncodedMatrix, Matrix, RawTable, Role, Schema, Standardization,
    VariableKind,
};
use crate::error::{Error, Result};

/// Default missing fraction above which a column is dropped.
pub const DEFAULT_SPARSE_THRESHOLD: f64 = 0.5;

/// Parses UTF-8 CSV text (RFC 4180 quoting, header row) against `schema`.
///
/// Output columns follow schema order; header columns the schema does not
/// declare are dropped. Cells equal to a variable's missing code become
/// [`Cell::Missing`].
pub fn parse_csv(text: &str, schema: &Schema) -> Result<RawTable> {
    // The csv reader silently swallows an unterminated quoted field, so
    // reject it up front: escaped quotes come in pairs in valid input.
    if text.bytes().filter(|&b| b == b'"').count() % 2 == 1 {
        return Err(Error::MalformedCsv {
            record: 0,
            message: "unbalanced quotes".into(),
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader.headers().map_err(csv_error)?.clone();
    let positions = schema
        .variables
        .iter()
        .map(|v| {
            header
                .iter()
                .position(|h| h == v.name)
                .ok_or_else(|| Error::MissingHeaderColumn(v.name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let mut cells = Vec::with_capacity(positions.len());
        for (var, &pos) in schema.variables.iter().zip(&positions) {
            let raw = record.get(pos).unwrap_or_default();
            if var.is_missing(raw) {
                cells.push(Cell::Missing);
                continue;
            }
            match &var.kind {
                VariableKind::Categorical { levels } => {
                    if !levels.iter().any(|l| l == raw) {
                        return Err(Error::UndeclaredLevel {
                            row,
                            variable: var.name.clone(),
                            value: raw.to_string(),
                        });
                    }
                }
                VariableKind::Numeric => {
                    if raw.parse::<f64>().map_or(true, |x| !x.is_finite()) {
                        return Err(Error::NotNumeric {
                            row,
                            variable: var.name.clone(),
                            value: raw.to_string(),
                        });
                    }
                }
            }
            cells.push(Cell::Value(raw.to_string()));
        }
        rows.push(cells);
    }
    Ok(RawTable {
        schema: schema.clone(),
        rows,
    })
}

fn csv_error(e: csv::Error) -> Error {
    let record = e
        .position()
        .map_or(0, |p| usize::try_from(p.record()).unwrap_or(usize::MAX));
    Error::MalformedCsv {
        record,
        message: e.to_string(),
    }
}

/// Writes a table back out in the ingest format; missing cells use the
/// variable's first missing code.
pub fn write_csv(table: &RawTable) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(table.schema.variables.iter().map(|v| v.name.as_str()))
        .expect("in-memory write");
    for row in &table.rows {
        let fields = row.iter().zip(&table.schema.variables).map(|(c, v)| match c {
            Cell::Value(s) => s.as_str(),
            Cell::Missing => v.missing_codes.iter().next().map_or("", String::as_str),
        });
        w.write_record(fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("input was UTF-8")
}

/// Removes columns whose missing fraction exceeds `threshold`. The label
/// source is never removed.
pub fn drop_sparse_columns(table: &RawTable, threshold: f64) -> (RawTable, Vec<String>) {
    let n = table.n_rows();
    let mut keep = Vec::new();
    let mut removed = Vec::new();
    for (j, var) in table.schema.variables.iter().enumerate() {
        let missing = table.column(j).filter(|c| c.is_missing()).count();
        let fraction = if n == 0 { 0.0 } else { missing as f64 / n as f64 };
        if fraction > threshold && var.role != Role::LabelSource {
            removed.push(var.name.clone());
        } else {
            keep.push(j);
        }
    }
    (table.select_columns(&keep), removed)
}

/// Removes every variable with role `Ignored`.
pub fn drop_ignored_columns(table: &RawTable) -> (RawTable, Vec<String>) {
    let (keep, removed): (Vec<usize>, Vec<usize>) =
        (0..table.n_cols()).partition(|&j| table.schema.variables[j].role != Role::Ignored);
    let names = removed
        .iter()
        .map(|&j| table.schema.variables[j].name.clone())
        .collect();
    (table.select_columns(&keep), names)
}

pub fn drop_incomplete_rows(table: &RawTable) -> RawTable {
    RawTable {
        schema: table.schema.clone(),
        rows: table
            .rows
            .iter()
            .filter(|r| r.iter().all(|c| !c.is_missing()))
            .cloned()
            .collect(),
    }
}

/// Encodes the feature variables of `table`.
///
/// Numeric variables give one column (optionally standardized with the
/// population standard deviation; constant columns become zeros), a
/// categorical variable with `L` levels gives `L` indicator columns in level
/// order. Label-source and ignored variables are skipped.
pub fn encode(table: &RawTable, standardize_numeric: bool) -> Result<EncodedMatrix> {
    let n = table.n_rows();
    let features: Vec<usize> = (0..table.n_cols())
        .filter(|&j| table.schema.variables[j].role == Role::Feature)
        .collect();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut meta = Vec::new();
    for &j in &features {
        let var = &table.schema.variables[j];
        let cells = table
            .column(j)
            .enumerate()
            .map(|(row, c)| {
                c.as_str().ok_or_else(|| Error::MissingCell {
                    row,
                    variable: var.name.clone(),
                })
            })
            .collect::<Result<Vec<&str>>>()?;

        match &var.kind {
            VariableKind::Numeric => {
                let mut col = cells
                    .iter()
                    .enumerate()
                    .map(|(row, s)| {
                        s.parse::<f64>().map_err(|_| Error::NotNumeric {
                            row,
                            variable: var.name.clone(),
                            value: s.to_string(),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let standardization = standardize_numeric.then(|| standardize_in_place(&mut col));
                columns.push(col);
                meta.push(ColumnMeta {
                    source: var.name.clone(),
                    tag: ColumnTag::Numeric { standardization },
                });
            }
            VariableKind::Categorical { levels } => {
                for level in levels {
                    columns.push(
                        cells
                            .iter()
                            .map(|s| if s == level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                    meta.push(ColumnMeta {
                        source: var.name.clone(),
                        tag: ColumnTag::Level {
                            level: level.clone(),
                            level_count: levels.len(),
                        },
                    });
                }
            }
        }
    }

    let d = columns.len();
    let mut values = Matrix::zeros(n, d);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            values.set(i, j, v);
        }
    }
    Ok(EncodedMatrix {
        values,
        column_meta: meta,
    })
}

/// Population mean and standard deviation.
pub fn mean_std(col: &[f64]) -> (f64, f64) {
    if col.is_empty() {
        return (0.0, 0.0);
    }
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub(crate) fn standardize_in_place(col: &mut [f64]) -> Standardization {
    let (mean, std_dev) = mean_std(col);
    // Relative guard: a column that is constant up to rounding has no scale.
    let constant = std_dev <= 1e-12 * mean.abs().max(1.0);
    for x in col.iter_mut() {
        *x = if constant { 0.0 } else { (*x - mean) / std_dev };
    }
    Standardization {
        mean,
        std_dev: if constant { 0.0 } else { std_dev },
    }
}

/// Standardizes every column of a matrix (used ahead of RFE and PCA).
pub fn standardize_columns(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let mut col = m.column(j);
        standardize_in_place(&mut col);
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionStage {
    SparseOrUnimportant,
    Correlation,
    Rfe,
    Pca,
}

impl fmt::Display for ReductionStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionStage::SparseOrUnimportant => "missing values and unimportant variables",
            ReductionStage::Correlation => "correlation",
            ReductionStage::Rfe => "rfe",
            ReductionStage::Pca => "pca",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: ReductionStage,
    pub count: usize,
    pub removed: Vec<String>,
}

/// Per-stage account of removed variables.
///
/// The first stage counts source variables; later stages count encoded
/// columns, so one-hot expansion between the two is carried explicitly and
/// the identity is `initial + encoding_expansion - removed = final`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionLedger {
    pub initial: usize,
    pub encoding_expansion: usize,
    pub stages: Vec<LedgerEntry>,
    pub final_count: usize,
}

impl ReductionLedger {
    pub fn new(initial: usize) -> Self {
        Self {
            initial,
            encoding_expansion: 0,
            stages: Vec::new(),
            final_count: initial,
        }
    }

    pub fn record(&mut self, stage: ReductionStage, removed: Vec<String>) -> Result<()> {
        if let Some(last) = self.stages.last() {
            if last.stage >= stage {
                return Err(Error::InvalidParameter(format!(
                    "ledger stage `{stage}` recorded after `{}`",
                    last.stage
                )));
            }
        }
        self.final_count = self.final_count.saturating_sub(removed.len());
        self.stages.push(LedgerEntry {
            stage,
            count: removed.len(),
            removed,
        });
        Ok(())
    }

    /// Encoding turned `variables` surviving source variables into `columns`.
    pub fn record_encoding(&mut self, variables: usize, columns: usize) {
        let extra = columns.saturating_sub(variables);
        self.encoding_expansion += extra;
        self.final_count += extra;
    }

    pub fn total_removed(&self) -> usize {
        self.stages.iter().map(|s| s.count).sum()
    }

    pub fn removed_in(&self, stage: ReductionStage) -> usize {
        self.stages
            .iter()
            .filter(|s| s.stage == stage)
            .map(|s| s.count)
            .sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.initial + self.encoding_expansion == self.total_removed() + self.final_count
            && self.stages.iter().all(|s| s.count == s.removed.len())
            && self.stages.windows(2).all(|w| w[0].stage < w[1].stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{LabelRule, VariableSpec};
    use proptest::prelude::*;

    fn schema3() -> Schema {
        Schema::new(
            vec![
                VariableSpec::categorical("Type place of residence", ["Urban", "Rural"]),
                VariableSpec::numeric("Child height").with_missing_codes(["", "NA"]),
                VariableSpec::categorical("y", ["Positive", "Negative"]).with_role(Role::LabelSource),
            ],
            LabelRule::Malaria,
        )
    }

    #[test]
    fn header_only() {
        let t = parse_csv("Type place of residence,Child height,y\n", &schema3()).unwrap();
        assert_eq!(t.n_rows(), 0);
        assert_eq!(t.n_cols(), 3);
    }

    #[test]
    fn cells_and_extra_columns() {
        let csv = "extra,Child height,Type place of residence,y\n\
                   9,NA,Urban,Positive\n\
                   9,81.5,\"Rural\",Negative\n";
        let t = parse_csv(csv, &schema3()).unwrap();
        assert_eq!(t.rows[0][0], Cell::Value("Urban".into()));
        assert_eq!(t.rows[0][1], Cell::Missing);
        assert_eq!(t.rows[1][1], Cell::Value("81.5".into()));
        assert_eq!(t.schema.variables.len(), 3);
    }

    #[test]
    fn parse_errors() {
        let s = schema3();
        assert!(matches!(
            parse_csv("Type place of residence,y\nUrban,Positive\n", &s),
            Err(Error::MissingHeaderColumn(v)) if v == "Child height"
        ));
        assert!(matches!(
            parse_csv("Type place of residence,Child height,y\nSuburban,3,Positive\n", &s),
            Err(Error::UndeclaredLevel { .. })
        ));
        assert!(matches!(
            parse_csv("Type place of residence,Child height,y\n\"Urban,3,Positive\n", &s),
            Err(Error::MalformedCsv { .. })
        ));
        assert!(matches!(
            parse_csv("Type place of residence,Child height,y\nUrban,3\n", &s),
            Err(Error::MalformedCsv { .. })
        ));
        assert!(matches!(
            parse_csv("Type place of residence,Child height,y\nUrban,tall,Positive\n", &s),
            Err(Error::NotNumeric { .. })
        ));
    }

    fn numeric_table(cols: &[Vec<Option<f64>>]) -> RawTable {
        let mut vars: Vec<VariableSpec> = (0..cols.len())
            .map(|j| VariableSpec::numeric(format!("v{j}")))
            .collect();
        vars.push(VariableSpec::categorical("y", ["Positive", "Negative"]).with_role(Role::LabelSource));
        let n = cols.first().map_or(0, Vec::len);
        let rows = (0..n)
            .map(|i| {
                let mut r: Vec<Cell> = cols
                    .iter()
                    .map(|c| c[i].map_or(Cell::Missing, |x| Cell::Value(x.to_string())))
                    .collect();
                r.push(Cell::Value("Positive".into()));
                r
            })
            .collect();
        RawTable {
            schema: Schema::new(vars, LabelRule::Malaria),
            rows,
        }
    }

    #[test]
    fn sparse_thresholds() {
        let mut sparse = vec![Some(1.0); 10];
        for c in sparse.iter_mut().take(6) {
            *c = None;
        }
        let one_missing = {
            let mut c = vec![Some(2.0); 10];
            c[3] = None;
            c
        };
        let t = numeric_table(&[sparse, one_missing, vec![Some(3.0); 10]]);

        let (kept, removed) = drop_sparse_columns(&t, 1.0);
        assert!(removed.is_empty());
        assert_eq!(kept.n_cols(), 4);

        let (kept, removed) = drop_sparse_columns(&t, 0.5);
        assert_eq!(removed, vec!["v0"]);
        assert_eq!(kept.n_rows(), 10);

        let (_, removed) = drop_sparse_columns(&t, 0.0);
        assert_eq!(removed, vec!["v0", "v1"]);
    }

    #[test]
    fn incomplete_rows() {
        let full = numeric_table(&[vec![Some(1.0), Some(2.0)]]);
        assert_eq!(drop_incomplete_rows(&full), full);

        let none = numeric_table(&[vec![None, None, None]]);
        assert_eq!(drop_incomplete_rows(&none).n_rows(), 0);

        let t = numeric_table(&[vec![Some(1.0), None, Some(3.0), None, Some(5.0)]]);
        let kept = drop_incomplete_rows(&t);
        let firsts: Vec<_> = kept.rows.iter().map(|r| r[0].clone()).collect();
        assert_eq!(
            firsts,
            vec![
                Cell::Value("1".into()),
                Cell::Value("3".into()),
                Cell::Value("5".into())
            ]
        );
    }

    #[test]
    fn one_hot() {
        let schema = Schema::new(
            vec![
                VariableSpec::categorical("Sex of child", ["Male", "Female"]),
                VariableSpec::categorical("y", ["Positive", "Negative"]).with_role(Role::LabelSource),
            ],
            LabelRule::Malaria,
        );
        let t = parse_csv("Sex of child,y\nMale,Positive\nFemale,Negative\n", &schema).unwrap();
        let m = encode(&t, true).unwrap();
        assert_eq!(m.values.row(0), &[1.0, 0.0]);
        assert_eq!(m.values.row(1), &[0.0, 1.0]);
        assert_eq!(m.column_names(), vec!["Sex of child=Male", "Sex of child=Female"]);
    }

    #[test]
    fn standardization_population_convention() {
        let t = numeric_table(&[vec![Some(2.0), Some(4.0), Some(6.0)]]);
        let m = encode(&t, true).unwrap();
        let expected = 2.0 / (8.0f64 / 3.0).sqrt();
        assert!((m.values.get(0, 0) + expected).abs() < 1e-12);
        assert!(m.values.get(1, 0).abs() < 1e-12);
        assert!((m.values.get(2, 0) - expected).abs() < 1e-12);
        assert!((expected - 1.224_744_871_391_589).abs() < 1e-12);

        let c = numeric_table(&[vec![Some(5.0); 3]]);
        let m = encode(&c, true).unwrap();
        assert_eq!(m.values.column(0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn encode_rejects_missing() {
        let t = numeric_table(&[vec![Some(1.0), None]]);
        assert!(matches!(encode(&t, false), Err(Error::MissingCell { row: 1, .. })));
    }

    #[test]
    fn ledger_order_and_conservation() {
        let mut l = ReductionLedger::new(5);
        l.record(ReductionStage::SparseOrUnimportant, vec!["a".into()]).unwrap();
        l.record_encoding(4, 7);
        l.record(ReductionStage::Correlation, vec!["b".into(), "c".into()]).unwrap();
        assert!(l.record(ReductionStage::Correlation, vec![]).is_err());
        assert_eq!(l.final_count, 5);
        assert!(l.is_conserved());
    }

    proptest! {
        #[test]
        fn standardized_columns_have_unit_scale(xs in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
            let mut col = xs.clone();
            let s = standardize_in_place(&mut col);
            let (m, sd) = mean_std(&col);
            prop_assert!(m.abs() < 1e-9);
            if s.std_dev > 0.0 {
                prop_assert!((sd - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(col.iter().all(|&x| x == 0.0));
            }
        }

        #[test]
        fn pruned_tables_always_encode(
            cells in proptest::collection::vec(proptest::collection::vec(proptest::option::weighted(0.7, 0.0f64..10.0), 3), 0..30),
            threshold in 0.0f64..=1.0,
        ) {
            let cols: Vec<Vec<Option<f64>>> = (0..3).map(|j| cells.iter().map(|r| r[j]).collect()).collect();
            let t = numeric_table(&cols);
            let (t, _) = drop_sparse_columns(&t, threshold);
            let t = drop_incomplete_rows(&t);
            let m = encode(&t, true);
            prop_assert!(m.is_ok());
        }
    }
}

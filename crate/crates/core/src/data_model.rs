//! Value types shared by every pipeline stage.
//!
//! A [`Schema`] declares the survey variables and the rule that turns the
//! label-source variable into a binary [`LabelVector`]. Parsed CSV data lives
//! in a [`RawTable`] of string cells; [`crate::ingest::encode`] turns it into
//! an [`EncodedMatrix`] whose columns remember where they came from.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Missing-value codes used when a variable does not declare its own.
pub const DEFAULT_MISSING_CODES: [&str; 2] = ["", "NA"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Feature,
    LabelSource,
    Ignored,
}

fn default_missing_codes() -> BTreeSet<String> {
    DEFAULT_MISSING_CODES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default)]
    pub role: Role,
    #[serde(default = "default_missing_codes")]
    pub missing_codes: BTreeSet<String>,
    #[serde(flatten)]
    pub kind: VariableKind,
}

impl VariableSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: Role::Feature,
            missing_codes: default_missing_codes(),
            kind: VariableKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            role: Role::Feature,
            missing_codes: default_missing_codes(),
            kind: VariableKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn with_missing_codes<S: Into<String>>(mut self, codes: impl IntoIterator<Item = S>) -> Self {
        self.missing_codes = codes.into_iter().map(Into::into).collect();
        self
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.kind {
            VariableKind::Categorical { levels } => Some(levels),
            VariableKind::Numeric => None,
        }
    }

    pub fn is_missing(&self, raw: &str) -> bool {
        self.missing_codes.contains(raw)
    }
}

/// How the anemia label source is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnemiaInput {
    /// Decimal hemoglobin in g/dl, e.g. `10.9`.
    #[default]
    Hemoglobin,
    /// Pre-binned level: Severe, Moderate, Mild or Not anemic.
    Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelRule {
    Anemia {
        #[serde(default)]
        input: AnemiaInput,
    },
    Malaria,
    /// Categorical label source; `positive` maps to +1, every other level to -1.
    Custom { positive: String },
}

impl LabelRule {
    pub fn positive_meaning(&self) -> String {
        match self {
            LabelRule::Anemia { .. } => "anemic".to_string(),
            LabelRule::Malaria => "malaria-positive".to_string(),
            LabelRule::Custom { positive } => positive.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub label_rule: LabelRule,
    pub variables: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>, label_rule: LabelRule) -> Self {
        Self {
            label_rule,
            variables,
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn label_source(&self) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.role == Role::LabelSource)
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.variables
            .iter()
            .filter(|v| v.role == Role::Feature)
            .map(|v| v.name.as_str())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema is always representable as TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSchema(e.to_string()))
    }

    /// Parses and rejects schemas with any [`Violation`].
    pub fn from_toml_validated(text: &str) -> Result<Self> {
        let schema = Self::from_toml(text)?;
        let violations = schema_validate(&schema);
        if violations.is_empty() {
            Ok(schema)
        } else {
            let msg = violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidSchema(msg))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateName(String),
    EmptyLevels(String),
    DuplicateLevel { variable: String, level: String },
    LevelIsMissingCode { variable: String, level: String },
    MissingLabelSource,
    MultipleLabelSources(Vec<String>),
    LabelRuleMismatch { variable: String, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName(v) => write!(f, "variable `{v}` is declared more than once"),
            Violation::EmptyLevels(v) => write!(f, "categorical `{v}` has no levels"),
            Violation::DuplicateLevel { variable, level } => {
                write!(f, "categorical `{variable}` repeats level `{level}`")
            }
            Violation::LevelIsMissingCode { variable, level } => {
                write!(f, "`{variable}` declares `{level}` both as a level and a missing code")
            }
            Violation::MissingLabelSource => write!(f, "no variable has role label_source"),
            Violation::MultipleLabelSources(vs) => {
                write!(f, "several label_source variables: {}", vs.join(", "))
            }
            Violation::LabelRuleMismatch { variable, reason } => {
                write!(f, "label source `{variable}`: {reason}")
            }
        }
    }
}

pub const ANEMIA_LEVEL_NAMES: [&str; 4] = ["Severe", "Moderate", "Mild", "Not anemic"];

/// Every way `schema` breaks the schema invariants; empty when well formed.
pub fn schema_validate(schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for v in &schema.variables {
        if !seen.insert(v.name.as_str()) && reported.insert(v.name.as_str()) {
            out.push(Violation::DuplicateName(v.name.clone()));
        }
        if let Some(levels) = v.levels() {
            if levels.is_empty() {
                out.push(Violation::EmptyLevels(v.name.clone()));
            }
            let mut lv = HashSet::new();
            for l in levels {
                if !lv.insert(l.as_str()) {
                    out.push(Violation::DuplicateLevel {
                        variable: v.name.clone(),
                        level: l.clone(),
                    });
                }
                if v.missing_codes.contains(l) {
                    out.push(Violation::LevelIsMissingCode {
                        variable: v.name.clone(),
                        level: l.clone(),
                    });
                }
            }
        }
    }

    let sources: Vec<&VariableSpec> = schema
        .variables
        .iter()
        .filter(|v| v.role == Role::LabelSource)
        .collect();
    match sources.as_slice() {
        [] => out.push(Violation::MissingLabelSource),
        [source] => {
            if let Some(reason) = label_rule_mismatch(&schema.label_rule, source) {
                out.push(Violation::LabelRuleMismatch {
                    variable: source.name.clone(),
                    reason,
                });
            }
        }
        many => out.push(Violation::MultipleLabelSources(
            many.iter().map(|v| v.name.clone()).collect(),
        )),
    }
    out
}

fn label_rule_mismatch(rule: &LabelRule, source: &VariableSpec) -> Option<String> {
    let has = |want: &str| {
        source
            .levels()
            .is_some_and(|ls| ls.iter().any(|l| l.eq_ignore_ascii_case(want)))
    };
    match (rule, &source.kind) {
        (LabelRule::Anemia { input: AnemiaInput::Hemoglobin }, VariableKind::Numeric) => None,
        (LabelRule::Anemia { input: AnemiaInput::Hemoglobin }, _) => {
            Some("hemoglobin input requires a numeric variable".into())
        }
        (LabelRule::Anemia { input: AnemiaInput::Level }, VariableKind::Categorical { levels }) => {
            levels
                .iter()
                .find(|l| !ANEMIA_LEVEL_NAMES.iter().any(|n| n.eq_ignore_ascii_case(l)))
                .map(|l| format!("`{l}` is not an anemia level"))
        }
        (LabelRule::Anemia { input: AnemiaInput::Level }, _) => {
            Some("level input requires a categorical variable".into())
        }
        (LabelRule::Malaria, VariableKind::Categorical { .. }) => {
            if has("Positive") && has("Negative") {
                None
            } else {
                Some("malaria rule needs levels Positive and Negative".into())
            }
        }
        (LabelRule::Malaria, _) => Some("malaria rule requires a categorical variable".into()),
        (LabelRule::Custom { positive }, VariableKind::Categorical { levels }) => {
            if levels.contains(positive) {
                None
            } else {
                Some(format!("positive level `{positive}` is not declared"))
            }
        }
        (LabelRule::Custom { .. }, _) => Some("custom rule requires a categorical variable".into()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Missing,
    Value(String),
}

impl Cell {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Missing => None,
            Cell::Value(s) => Some(s),
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

/// Parsed survey rows; one cell per schema variable, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.variables.len()
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[index])
    }

    /// Keeps only the variables whose positions are listed, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> RawTable {
        let variables = keep.iter().map(|&i| self.schema.variables[i].clone()).collect();
        RawTable {
            schema: Schema::new(variables, self.schema.label_rule.clone()),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        }
    }
}

pub fn column_missing_fraction(table: &RawTable, variable: &str) -> Result<f64> {
    let idx = table
        .schema
        .index_of(variable)
        .ok_or_else(|| Error::UnknownVariable(variable.to_string()))?;
    if table.rows.is_empty() {
        return Ok(0.0);
    }
    let missing = table.column(idx).filter(|c| c.is_missing()).count();
    Ok(missing as f64 / table.n_rows() as f64)
}

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * keep.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(keep.iter().map(|&j| r[j]));
        }
        Matrix {
            rows: self.rows,
            cols: keep.len(),
            data,
        }
    }

    pub fn select_rows(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: keep.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnTag {
    Numeric {
        standardization: Option<Standardization>,
    },
    /// One-hot indicator for `level`; `level_count` is the source variable's
    /// declared level count, which survives even if sibling columns are removed.
    Level { level: String, level_count: usize },
    /// Principal-component score.
    Component { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub source: String,
    pub tag: ColumnTag,
}

impl ColumnMeta {
    pub fn name(&self) -> String {
        match &self.tag {
            ColumnTag::Numeric { .. } => self.source.clone(),
            ColumnTag::Level { level, .. } => format!("{}={}", self.source, level),
            ColumnTag::Component { index } => format!("PC{}", index + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub values: Matrix,
    pub column_meta: Vec<ColumnMeta>,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.cols()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.column_meta.iter().map(ColumnMeta::name).collect()
    }

    pub fn select_columns(&self, keep: &[usize]) -> EncodedMatrix {
        EncodedMatrix {
            values: self.values.select_columns(keep),
            column_meta: keep.iter().map(|&j| self.column_meta[j].clone()).collect(),
        }
    }

    pub fn select_rows(&self, keep: &[usize]) -> EncodedMatrix {
        EncodedMatrix {
            values: self.values.select_rows(keep),
            column_meta: self.column_meta.clone(),
        }
    }

    /// Treats every column as plain numeric data.
    pub fn from_numeric(values: Matrix) -> Self {
        let column_meta = (0..values.cols())
            .map(|j| ColumnMeta {
                source: format!("x{}", j + 1),
                tag: ColumnTag::Numeric {
                    standardization: None,
                },
            })
            .collect();
        Self {
            values,
            column_meta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(serde::de::Error::custom(format!("label must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub labels: Vec<Label>,
    pub positive_meaning: String,
}

impl LabelVector {
    pub fn new(labels: Vec<Label>, positive_meaning: impl Into<String>) -> Self {
        Self {
            labels,
            positive_meaning: positive_meaning.into(),
        }
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        Self::new(
            signs.iter().map(|&s| Label::from_sign(f64::from(s))).collect(),
            "positive",
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    pub fn select(&self, idx: &[usize]) -> LabelVector {
        LabelVector {
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            positive_meaning: self.positive_meaning.clone(),
        }
    }
}

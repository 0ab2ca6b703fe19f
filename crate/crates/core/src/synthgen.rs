//! Seeded survey-like tables with a planted linear label signal.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so a table is reproducible from `(ChaCha8, seed)`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data_model::{
    AnemiaInput, Cell, Label, LabelRule, LabelVector, RawTable, Role, Schema, VariableKind, VariableSpec,
};
use crate::error::{Error, Result};
use crate::ingest::write_csv;
use crate::labeling::{AnemiaLevel, MalariaResult};

pub const PLANTED_LABEL: &str = "label";
pub const PLANTED_POSITIVE: &str = "positive";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Informative {
    pub column: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub informative: Vec<Informative>,
    #[serde(default)]
    pub noise_rate: f64,
    /// Applies to every column without an override.
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub column_missing_rates: BTreeMap<String, f64>,
}

impl SignalSpec {
    pub fn new<S: Into<String>>(informative: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self {
            informative: informative
                .into_iter()
                .map(|(c, w)| Informative {
                    column: c.into(),
                    weight: w,
                })
                .collect(),
            ..Self::default()
        }
    }

    pub fn with_noise(mut self, noise_rate: f64) -> Self {
        self.noise_rate = noise_rate;
        self
    }

    pub fn with_missing(mut self, missing_rate: f64) -> Self {
        self.missing_rate = missing_rate;
        self
    }

    fn missing_rate_for(&self, column: &str) -> f64 {
        self.column_missing_rates
            .get(column)
            .copied()
            .unwrap_or(self.missing_rate)
    }
}

/// `d` numeric columns `x1..xd` plus a categorical `label` column.
pub fn planted_schema(d: usize) -> Schema {
    let mut vars: Vec<VariableSpec> = (1..=d).map(|j| VariableSpec::numeric(format!("x{j}"))).collect();
    vars.push(
        VariableSpec::categorical(PLANTED_LABEL, [PLANTED_POSITIVE, "negative"]).with_role(Role::LabelSource),
    );
    Schema::new(
        vars,
        LabelRule::Custom {
            positive: PLANTED_POSITIVE.into(),
        },
    )
}

fn unit_rate(name: &str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be in [0, 1), got {v}")))
    }
}

fn validate(schema: &Schema, n: usize, spec: &SignalSpec) -> Result<Vec<(usize, f64)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    unit_rate("noise_rate", spec.noise_rate)?;
    unit_rate("missing_rate", spec.missing_rate)?;
    for (col, &rate) in &spec.column_missing_rates {
        if schema.index_of(col).is_none() {
            return Err(Error::UnknownVariable(col.clone()));
        }
        unit_rate(&format!("missing rate of `{col}`"), rate)?;
    }
    let violations = crate::data_model::schema_validate(schema);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidSchema(v.to_string()));
    }
    let mut seen = BTreeSet::new();
    spec.informative
        .iter()
        .map(|inf| {
            let idx = schema
                .index_of(&inf.column)
                .ok_or_else(|| Error::UnknownVariable(inf.column.clone()))?;
            if schema.variables[idx].role != Role::Feature {
                return Err(Error::InvalidParameter(format!(
                    "informative column `{}` is not a feature",
                    inf.column
                )));
            }
            if !seen.insert(idx) {
                return Err(Error::InvalidParameter(format!(
                    "informative column `{}` listed twice",
                    inf.column
                )));
            }
            if !inf.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight of `{}` is not finite",
                    inf.column
                )));
            }
            Ok((idx, inf.weight))
        })
        .collect()
}

fn label_cell(var: &VariableSpec, rule: &LabelRule, label: Label, rng: &mut ChaCha8Rng) -> Result<String> {
    let positive = label == Label::Positive;
    let pick_level = |matches: &dyn Fn(&str) -> bool| -> Result<String> {
        var.levels()
            .and_then(|levels| levels.iter().find(|l| matches(l)))
            .cloned()
            .ok_or_else(|| {
                Error::InvalidSchema(format!(
                    "label source `{}` has no level for class {}",
                    var.name,
                    label.as_i8()
                ))
            })
    };
    match (rule, &var.kind) {
        (LabelRule::Anemia { input: AnemiaInput::Hemoglobin }, VariableKind::Numeric) => {
            let tenths: i64 = if positive {
                rng.random_range(60..=109)
            } else {
                rng.random_range(110..=150)
            };
            Ok(format!("{}.{}", tenths / 10, tenths % 10))
        }
        (LabelRule::Anemia { input: AnemiaInput::Level }, VariableKind::Categorical { .. }) => {
            let want: &[AnemiaLevel] = if positive {
                &[AnemiaLevel::Severe, AnemiaLevel::Moderate, AnemiaLevel::Mild]
            } else {
                &[AnemiaLevel::NotAnemic]
            };
            let level = want[rng.random_range(0..want.len())];
            pick_level(&|l| AnemiaLevel::parse(l) == Some(level))
        }
        (LabelRule::Malaria, VariableKind::Categorical { .. }) => {
            let want = if positive {
                MalariaResult::Positive
            } else {
                MalariaResult::Negative
            };
            pick_level(&|l| MalariaResult::parse(l) == Some(want))
        }
        (LabelRule::Custom { positive: p }, VariableKind::Categorical { .. }) => {
            if positive {
                pick_level(&|l| l == p)
            } else {
                pick_level(&|l| l != p)
            }
        }
        (LabelRule::Custom { positive: p }, VariableKind::Numeric) => {
            let pv: f64 = p.parse().map_err(|_| {
                Error::InvalidSchema(format!("numeric label source needs a numeric positive value, got `{p}`"))
            })?;
            Ok(if positive { p.clone() } else { (pv + 1.0).to_string() })
        }
        _ => Err(Error::InvalidSchema(format!(
            "label source `{}` does not fit the label rule",
            var.name
        ))),
    }
}

/// Draws `n` rows. Numeric features are standard normal; categorical
/// features are uniform over their levels. The latent score sums
/// `weight · value` over informative columns, where a categorical column
/// contributes `+1` for its first level and `−1` otherwise. The label is
/// `sign(score)` (zero counts as positive), flipped with probability
/// `noise_rate`; the label-source column is written to agree with it and is
/// never masked.
pub fn generate(schema: &Schema, n: usize, spec: &SignalSpec, seed: u64) -> Result<(RawTable, LabelVector)> {
    let informative = validate(schema, n, spec)?;
    let label_idx = schema
        .variables
        .iter()
        .position(|v| v.role == Role::LabelSource)
        .ok_or_else(|| Error::InvalidSchema("no label source".into()))?;
    let weights: BTreeMap<usize, f64> = informative.into_iter().collect();
    let rates: Vec<f64> = schema
        .variables
        .iter()
        .map(|v| spec.missing_rate_for(&v.name))
        .collect();
    if let Some(v) = schema
        .variables
        .iter()
        .zip(&rates)
        .find(|(v, &r)| r > 0.0 && v.missing_codes.is_empty())
    {
        return Err(Error::InvalidParameter(format!(
            "`{}` has no missing code to write masked cells with",
            v.0.name
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![Cell::Missing; schema.variables.len()];
        let mut score = 0.0;
        for (j, var) in schema.variables.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let (text, value) = match &var.kind {
                VariableKind::Numeric => {
                    let v: f64 = rng.sample(StandardNormal);
                    (v.to_string(), v)
                }
                VariableKind::Categorical { levels } => {
                    let k = rng.random_range(0..levels.len());
                    (levels[k].clone(), if k == 0 { 1.0 } else { -1.0 })
                }
            };
            if let Some(w) = weights.get(&j) {
                score += w * value;
            }
            row[j] = Cell::Value(text);
        }
        let mut label = Label::from_sign(score);
        if spec.noise_rate > 0.0 && rng.random::<f64>() < spec.noise_rate {
            label = label.flip();
        }
        row[label_idx] = Cell::Value(label_cell(
            &schema.variables[label_idx],
            &schema.label_rule,
            label,
            &mut rng,
        )?);
        for (j, cell) in row.iter_mut().enumerate() {
            if j != label_idx && rates[j] > 0.0 && rng.random::<f64>() < rates[j] {
                *cell = Cell::Missing;
            }
        }
        rows.push(row);
        labels.push(label);
    }
    Ok((
        RawTable {
            schema: schema.clone(),
            rows,
        },
        LabelVector::new(labels, schema.label_rule.positive_meaning()),
    ))
}

/// The generated table rendered in the ingest CSV format.
pub fn generate_csv(schema: &Schema, n: usize, spec: &SignalSpec, seed: u64) -> Result<String> {
    generate(schema, n, spec, seed).map(|(t, _)| write_csv(&t))
}

//! Binary label construction.
//!
//! Anemia comes from hemoglobin (held as integer tenths of g/dl so the WHO
//! bins tile exactly) or from a pre-binned level; malaria comes from the
//! recorded test result.

use serde::{Deserialize, Serialize};

use crate::data_model::{AnemiaInput, Cell, Label, LabelRule, LabelVector, RawTable, Role};
use crate::error::{Error, Result};

pub const MAX_HEMOGLOBIN_TENTHS: i64 = 250;

/// Ordered by hemoglobin: `Severe < Moderate < Mild < NotAnemic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnemiaLevel {
    Severe,
    Moderate,
    Mild,
    NotAnemic,
}

impl AnemiaLevel {
    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "severe" => Some(Self::Severe),
            "moderate" => Some(Self::Moderate),
            "mild" => Some(Self::Mild),
            "not anemic" | "not anaemic" | "notanemic" => Some(Self::NotAnemic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MalariaResult {
    Positive,
    Negative,
}

impl MalariaResult {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Some(Self::Positive),
            "negative" => Some(Self::Negative),
            _ => None,
        }
    }
}

pub fn anemia_level(hb_tenths: i64) -> Result<AnemiaLevel> {
    if !(0..=MAX_HEMOGLOBIN_TENTHS).contains(&hb_tenths) {
        return Err(Error::HemoglobinOutOfRange(hb_tenths));
    }
    Ok(match hb_tenths {
        ..=69 => AnemiaLevel::Severe,
        70..=99 => AnemiaLevel::Moderate,
        100..=109 => AnemiaLevel::Mild,
        _ => AnemiaLevel::NotAnemic,
    })
}

pub fn binarize_anemia(level: AnemiaLevel) -> Label {
    match level {
        AnemiaLevel::Severe | AnemiaLevel::Moderate | AnemiaLevel::Mild => Label::Positive,
        AnemiaLevel::NotAnemic => Label::Negative,
    }
}

pub fn malaria_label(result: MalariaResult) -> Label {
    match result {
        MalariaResult::Positive => Label::Positive,
        MalariaResult::Negative => Label::Negative,
    }
}

/// Exact decimal parse of a g/dl reading into tenths; `"10.9"` → 109.
/// More than one fractional digit is rejected rather than rounded.
pub fn parse_hemoglobin_tenths(s: &str) -> Result<i64> {
    let bad = || Error::BadHemoglobin(s.to_string());
    let t = s.trim();
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 1 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if t.ends_with('.') {
        return Err(bad());
    }
    let whole: i64 = int_part.parse().map_err(|_| bad())?;
    let tenth: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    whole
        .checked_mul(10)
        .and_then(|w| w.checked_add(tenth))
        .ok_or_else(bad)
}

/// Label for one non-missing label-source cell under `rule`.
pub fn label_value(rule: &LabelRule, raw: &str) -> Result<Label> {
    match rule {
        LabelRule::Anemia {
            input: AnemiaInput::Hemoglobin,
        } => Ok(binarize_anemia(anemia_level(parse_hemoglobin_tenths(raw)?)?)),
        LabelRule::Anemia {
            input: AnemiaInput::Level,
        } => AnemiaLevel::parse(raw)
            .map(binarize_anemia)
            .ok_or_else(|| Error::BadLabelValue(raw.to_string())),
        LabelRule::Malaria => MalariaResult::parse(raw)
            .map(malaria_label)
            .ok_or_else(|| Error::BadLabelValue(raw.to_string())),
        LabelRule::Custom { positive } => Ok(if raw == positive {
            Label::Positive
        } else {
            Label::Negative
        }),
    }
}

/// Builds the label vector from the table's label-source column.
pub fn build_labels(table: &RawTable) -> Result<LabelVector> {
    let idx = table
        .schema
        .variables
        .iter()
        .position(|v| v.role == Role::LabelSource)
        .ok_or_else(|| Error::InvalidSchema("no label_source variable".into()))?;
    let rule = &table.schema.label_rule;
    let labels = table
        .rows
        .iter()
        .enumerate()
        .map(|(row, cells)| match &cells[idx] {
            Cell::Value(v) => label_value(rule, v),
            Cell::Missing => Err(Error::MissingCell {
                row,
                variable: table.schema.variables[idx].name.clone(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelVector::new(labels, rule.positive_meaning()))
}

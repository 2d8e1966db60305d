//! Input parsing and deterministic output formatting.
//!
//! Inputs are UTF-8 CSV files with a header row and '.' as the decimal
//! separator. Two row schemas exist and may not be mixed within a file:
//!
//! - counts:  `arm_id,n,successes`
//! - moments: `arm_id,n,mean,std_err`
//!
//! All numbers emitted into reports are rounded to 12 significant digits
//! (ties to even) before serialization, and JSON objects serialize with
//! sorted keys, so byte-identical inputs and flags produce byte-identical
//! reports.

use std::fs;
use std::path::Path;

use armshrink::estimator::ArmSummary;
use armshrink::scenario::ArmTruth;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSchema {
    Counts,
    Moments,
}

impl RowSchema {
    pub fn label(self) -> &'static str {
        match self {
            RowSchema::Counts => "counts",
            RowSchema::Moments => "moments",
        }
    }
}

/// Parsed experiment file: one schema, unique arm ids.
pub struct ExperimentFile {
    pub experiment_id: String,
    pub schema: RowSchema,
    pub arms: Vec<ArmSummary>,
}

pub fn read_experiment(path: &Path) -> CliResult<ExperimentFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let schema = match fields.as_slice() {
        ["arm_id", "n", "successes"] => RowSchema::Counts,
        ["arm_id", "n", "mean", "std_err"] => RowSchema::Moments,
        other => {
            return Err(CliError::Validation(format!(
                "{}: unrecognized header {:?}; expected arm_id,n,successes or arm_id,n,mean,std_err",
                path.display(),
                other.join(",")
            )))
        }
    };

    let mut arms = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".into());
            CliError::Validation(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let expected = match schema {
            RowSchema::Counts => 3,
            RowSchema::Moments => 4,
        };
        if record.len() != expected {
            return Err(CliError::Validation(format!(
                "{}: line {line}: expected {expected} fields per the header schema, got {}",
                path.display(),
                record.len()
            )));
        }
        let arm_id = record[0].to_string();
        let n: u64 = parse_field(&record[1], "n", path, line)?;
        let arm = match schema {
            RowSchema::Counts => {
                let successes: u64 = parse_field(&record[2], "successes", path, line)?;
                ArmSummary::from_counts(arm_id, n, successes)
            }
            RowSchema::Moments => {
                let mean: f64 = parse_field(&record[2], "mean", path, line)?;
                let std_err: f64 = parse_field(&record[3], "std_err", path, line)?;
                ArmSummary::new(arm_id, n, mean, std_err)
            }
        }
        .map_err(|e| CliError::Validation(format!("{}: line {line}: {e}", path.display())))?;
        arms.push(arm);
    }

    let mut seen = std::collections::BTreeSet::new();
    for arm in &arms {
        if !seen.insert(arm.arm_id.as_str()) {
            return Err(CliError::Validation(format!(
                "{}: duplicate arm id {}",
                path.display(),
                arm.arm_id
            )));
        }
    }

    let experiment_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    Ok(ExperimentFile {
        experiment_id,
        schema,
        arms,
    })
}

/// Reads a scenario file (either schema) as ground truth.
pub fn read_scenario(path: &Path) -> CliResult<Vec<ArmTruth>> {
    let file = read_experiment(path)?;
    Ok(file
        .arms
        .into_iter()
        .map(|arm| ArmTruth {
            arm_id: arm.arm_id,
            mean: arm.mean,
            std_err: arm.std_err,
            n: arm.n,
        })
        .collect())
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    name: &str,
    path: &Path,
    line: u64,
) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| {
        CliError::Validation(format!(
            "{}: line {line}: field {name}: {e}",
            path.display()
        ))
    })
}

/// Rounds to 12 significant decimal digits; the round-trip through the
/// formatter uses round-half-even digit rounding.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

/// Shortest decimal representation of the 12-significant-digit rounding.
pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig12(x))
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Serializes with every fractional number rounded to 12 significant
/// digits, sorted keys, two-space indentation, and a trailing newline.
pub fn to_report_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut value = serde_json::to_value(value)?;
    round_value(&mut value);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if !n.is_i64() && !n.is_u64() {
                if let Some(f) = n.as_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig12(f)) {
                        *n = rounded;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents.as_bytes())
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

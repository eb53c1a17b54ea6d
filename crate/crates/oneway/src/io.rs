//! JSON files for function tables, joint distributions and labeled joints.
//!
//! ```text
//! function:      {"x_size":N,"y_size":M,"z_size":K,"partial":B,"values":[[..],..]}
//! distribution:  {"x_size":N,"y_size":M,"p":[[..],..]}
//! labeled joint: {"axes":[n1,..,nr],"probs":[[..]..]}   (nested r deep)
//! ```
//!
//! Undefined cells are written as `-1`. Floats round-trip exactly.

use std::fs;
use std::path::Path;

use oneway_core::{FunctionTable, JointDistribution, LabeledJoint, MASS_TOLERANCE};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionFile {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    partial: bool,
    values: Vec<Vec<i64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    x_size: usize,
    y_size: usize,
    p: Vec<Vec<f64>>,
}

fn format_error(path: &Path, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn check_rows<T>(path: &Path, rows: &[Vec<T>], x_size: usize, y_size: usize) -> Result<()> {
    if rows.len() != x_size {
        return Err(format_error(
            path,
            format!("expected {x_size} rows, found {}", rows.len()),
        ));
    }
    if let Some((x, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != y_size) {
        return Err(format_error(
            path,
            format!("row {x} has {} entries, expected {y_size}", row.len()),
        ));
    }
    Ok(())
}

pub fn parse_function(path: &Path, text: &str) -> Result<FunctionTable> {
    let file: FunctionFile = parse(path, text)?;
    check_rows(path, &file.values, file.x_size, file.y_size)?;
    let mut cells = Vec::with_capacity(file.x_size * file.y_size);
    for (x, row) in file.values.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            cells.push(match v {
                -1 => None,
                v if (0..=u32::MAX as i64).contains(&v) => Some(v as u32),
                v => {
                    return Err(format_error(
                        path,
                        format!("cell ({x}, {y}) = {v} is neither -1 nor a valid output"),
                    ))
                }
            });
        }
    }
    FunctionTable::new(file.x_size, file.y_size, file.z_size, file.partial, cells)
        .map_err(|e| format_error(path, e.to_string()))
}

pub fn function_to_json(f: &FunctionTable) -> String {
    let file = FunctionFile {
        x_size: f.x_size(),
        y_size: f.y_size(),
        z_size: f.z_size(),
        partial: f.is_partial(),
        values: (0..f.x_size())
            .map(|x| f.row(x).map(|v| v.map_or(-1, i64::from)).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("tables serialize") + "\n"
}

pub fn parse_distribution(path: &Path, text: &str) -> Result<JointDistribution> {
    let file: DistributionFile = parse(path, text)?;
    check_rows(path, &file.p, file.x_size, file.y_size)?;
    JointDistribution::new(file.x_size, file.y_size, file.p.concat())
        .map_err(|e| format_error(path, e.to_string()))
}

pub fn distribution_to_json(mu: &JointDistribution) -> String {
    let file = DistributionFile {
        x_size: mu.x_size(),
        y_size: mu.y_size(),
        p: mu.probs().chunks(mu.y_size()).map(<[f64]>::to_vec).collect(),
    };
    serde_json::to_string(&file).expect("distributions serialize") + "\n"
}

/// Flattens a nested array whose shape must equal `axes`.
fn flatten(path: &Path, v: &Value, axes: &[usize], at: &mut Vec<usize>, out: &mut Vec<f64>) -> Result<()> {
    match axes.split_first() {
        None => match v.as_f64() {
            Some(p) => {
                out.push(p);
                Ok(())
            }
            None => Err(format_error(path, format!("entry {at:?} is not a number"))),
        },
        Some((&n, rest)) => {
            let items = v
                .as_array()
                .filter(|a| a.len() == n)
                .ok_or_else(|| format_error(path, format!("entry {at:?} must be an array of length {n}")))?;
            for (i, item) in items.iter().enumerate() {
                at.push(i);
                flatten(path, item, rest, at, out)?;
                at.pop();
            }
            Ok(())
        }
    }
}

pub fn parse_labeled_joint(path: &Path, text: &str) -> Result<LabeledJoint> {
    let v: Value = parse(path, text)?;
    let axes: Vec<usize> = v
        .get("axes")
        .cloned()
        .map(serde_json::from_value)
        .transpose()
        .map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?
        .ok_or_else(|| format_error(path, "missing \"axes\"".into()))?;
    let probs = v
        .get("probs")
        .ok_or_else(|| format_error(path, "missing \"probs\"".into()))?;
    let mut flat = Vec::new();
    flatten(path, probs, &axes, &mut Vec::new(), &mut flat)?;
    if let Some(i) = flat.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(format_error(path, format!("entry {i} (row-major) is negative or not finite")));
    }
    let total: f64 = flat.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(format_error(path, format!("total mass {total} differs from 1")));
    }
    LabeledJoint::new(axes.clone(), flat.clone())
        .or_else(|_| LabeledJoint::from_weights(axes, flat))
        .map_err(|e| format_error(path, e.to_string()))
}

pub fn labeled_joint_to_json(j: &LabeledJoint) -> String {
    fn nest(axes: &[usize], probs: &[f64]) -> Value {
        match axes.split_first() {
            None => Value::from(probs[0]),
            Some((&n, rest)) => {
                let stride = probs.len() / n;
                Value::Array(probs.chunks(stride).map(|c| nest(rest, c)).collect())
            }
        }
    }
    let v = serde_json::json!({ "axes": j.axes(), "probs": nest(j.axes(), j.probs()) });
    serde_json::to_string(&v).expect("joints serialize") + "\n"
}

/// True when the JSON object has an `"axes"` key, marking a labeled joint.
pub fn is_labeled_joint(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .ok()
        .is_some_and(|v| v.get("axes").is_some())
}

pub fn load_function(path: &Path) -> Result<FunctionTable> {
    parse_function(path, &read(path)?)
}

pub fn save_function(path: &Path, f: &FunctionTable) -> Result<()> {
    write(path, &function_to_json(f))
}

pub fn load_distribution(path: &Path) -> Result<JointDistribution> {
    parse_distribution(path, &read(path)?)
}

pub fn save_distribution(path: &Path, mu: &JointDistribution) -> Result<()> {
    write(path, &distribution_to_json(mu))
}

pub fn load_labeled_joint(path: &Path) -> Result<LabeledJoint> {
    parse_labeled_joint(path, &read(path)?)
}

pub fn save_labeled_joint(path: &Path, j: &LabeledJoint) -> Result<()> {
    write(path, &labeled_joint_to_json(j))
}

/// Reads a file that is either a distribution or a labeled joint.
pub enum AnyDistribution {
    Joint(JointDistribution),
    Labeled(LabeledJoint),
}

pub fn load_any_distribution(path: &Path) -> Result<AnyDistribution> {
    let text = read(path)?;
    if is_labeled_joint(&text) {
        parse_labeled_joint(path, &text).map(AnyDistribution::Labeled)
    } else {
        parse_distribution(path, &text).map(AnyDistribution::Joint)
    }
}

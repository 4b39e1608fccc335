//! JSON report writing with numbers rounded to 12 significant digits.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n.as_f64().map(round_significant).and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Copy of `report` with every float rounded, so that what is written is
/// exactly what is held in memory.
pub fn rounded<T: Serialize + DeserializeOwned>(report: &T) -> Result<T, CliError> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Numerical(e.to_string()))?;
    round_value(&mut v);
    serde_json::from_value(v).map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn write_json<T: Serialize + DeserializeOwned>(path: &Path, report: &T) -> Result<T, CliError> {
    let r = rounded(report)?;
    let mut text = serde_json::to_string_pretty(&r).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(r)
}

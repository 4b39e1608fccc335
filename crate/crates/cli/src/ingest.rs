//! Reading a sample from disk: one value per line, or CSV with a `dbh`
//! column.

use std::path::Path;

use sbfit_core::Dataset;

use crate::error::CliError;

fn parse_value(raw: &str, line: usize, path: &Path) -> Result<f64, CliError> {
    let v: f64 = raw.trim().parse().map_err(|_| {
        CliError::Data(format!("{}:{line}: cannot parse {:?} as a number", path.display(), raw.trim()))
    })?;
    if !v.is_finite() || v <= 0.0 {
        return Err(CliError::Data(format!(
            "{}:{line}: observations must be positive and finite, got {v}",
            path.display()
        )));
    }
    Ok(v)
}

fn skip(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn ingest(path: &Path) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let Some(first) = text.lines().find(|l| !skip(l)) else {
        return Err(CliError::Data(format!("{}: file contains no observations", path.display())));
    };
    let looks_numeric = first.trim().parse::<f64>().is_ok();
    let values = if looks_numeric || !first.contains(',') && !first.trim().eq_ignore_ascii_case("dbh") {
        plain(&text, path)?
    } else {
        dbh_column(&text, path)?
    };
    if values.is_empty() {
        return Err(CliError::Data(format!("{}: file contains no observations", path.display())));
    }
    Dataset::new(values).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn plain(text: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !skip(l))
        .map(|(i, l)| parse_value(l, i + 1, path))
        .collect()
}

fn dbh_column(text: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("dbh"))
        .ok_or_else(|| {
            CliError::Data(format!(
                "{}:1: header has no `dbh` column (found: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw = record.get(col).ok_or_else(|| {
            CliError::Data(format!("{}:{line}: row has no `dbh` field", path.display()))
        })?;
        if raw.is_empty() {
            continue;
        }
        values.push(parse_value(raw, line, path)?);
    }
    Ok(values)
}

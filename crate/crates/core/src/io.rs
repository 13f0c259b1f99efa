//! Distribution files: JSON `{"support": [...], "mass": [...]}` or CSV with a
//! `label,mass` header.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

pub fn parse_json(text: &str) -> Result<DiscreteDistribution> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("JSON distribution: {e}")))
}

#[derive(Deserialize)]
struct Row {
    label: String,
    mass: f64,
}

pub fn parse_csv(text: &str) -> Result<DiscreteDistribution> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Input(format!("CSV distribution header: {e}")))?
        .clone();
    for field in ["label", "mass"] {
        if !headers.iter().any(|h| h == field) {
            return Err(Error::Input(format!("CSV distribution is missing the `{field}` column")));
        }
    }
    let mut support = Vec::new();
    let mut mass = Vec::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Input(format!("CSV distribution row {}: field `mass`: {e}", line + 1)))?;
        support.push(row.label);
        mass.push(row.mass);
    }
    DiscreteDistribution::new(support, mass)
}

/// Reads by extension: `.csv` as CSV, anything else as JSON.
pub fn read_distribution(path: &Path) -> Result<DiscreteDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv { parse_csv(&text) } else { parse_json(&text) };
    parsed.map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

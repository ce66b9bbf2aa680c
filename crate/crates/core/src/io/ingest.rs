use std::io::Read;
use std::path::Path;

use crate::error::{GreyError, Result};
use crate::sequences::ObservationSeries;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub speed: String,
    /// Echoed into outputs, never used by the models.
    pub time: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self { speed: "speed".into(), time: None }
    }
}

pub fn ingest_csv(path: &Path, mapping: &ColumnMapping) -> Result<ObservationSeries> {
    ingest_reader(std::fs::File::open(path)?, mapping)
}

/// Rows are numbered from 1 at the first data row.
pub fn ingest_reader<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<ObservationSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(GreyError::Domain("input file is empty".into()));
    }
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            GreyError::Schema(format!("column `{name}` not found in header {:?}", headers.iter().collect::<Vec<_>>()))
        })
    };
    let speed_idx = column(&mapping.speed)?;
    let time_idx = mapping.time.as_deref().map(column).transpose()?;

    let mut values = Vec::new();
    let mut times = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejected.push((row, e.to_string()));
                continue;
            }
        };
        let field = record.get(speed_idx).unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => values.push(v),
            Ok(v) => {
                rejected.push((row, format!("speed {v} is not a positive finite number")));
                continue;
            }
            Err(_) => {
                rejected.push((row, format!("speed `{field}` is not a number")));
                continue;
            }
        }
        if let Some(t) = time_idx {
            let field = record.get(t).unwrap_or("");
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => times.push(v),
                _ => {
                    values.pop();
                    rejected.push((row, format!("timestamp `{field}` is not a number")));
                }
            }
        }
    }
    if !rejected.is_empty() {
        return Err(GreyError::RejectedRows(rejected));
    }
    if values.is_empty() {
        return Err(GreyError::Domain("input file has no data rows".into()));
    }
    match time_idx {
        Some(_) => ObservationSeries::with_timestamps(values, times),
        None => ObservationSeries::new(values),
    }
}

//! Accumulation (AGO), its inverse, and the adjacent-mean background sequence.
//!
//! Sequences are 1-based in the domain model: `values[0]` holds `x(1)`.
//! The mean sequence starts at `k = 2`, so `MeanSequence::values()[0]` is `z(2)`.

use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};

/// Raw positive observations `x(0)(1..n)`, with optional timestamps (minutes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<f64>>,
}

impl ObservationSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GreyError::Domain("observation series is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(GreyError::Domain(format!(
                "observation {} is {v}; grey models need finite positive values",
                i + 1
            )));
        }
        Ok(Self { values, timestamps: None })
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(GreyError::Domain(format!(
                "{} timestamps for {} observations",
                timestamps.len(),
                values.len()
            )));
        }
        let mut series = Self::new(values)?;
        series.timestamps = Some(timestamps);
        Ok(series)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `x(1)(k) = Σ_{i ≤ k} x(0)(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedSeries(Vec<f64>);

impl AccumulatedSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GreyError::Domain("accumulated series is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GreyError::Domain("accumulated series has non-finite entries".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `z(1)(k)` for `k = 2..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSequence(Vec<f64>);

impl MeanSequence {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn ago(series: &ObservationSeries) -> AccumulatedSeries {
    accumulate(series.values())
}

pub(crate) fn accumulate(values: &[f64]) -> AccumulatedSeries {
    let acc = values
        .iter()
        .scan(0.0, |sum, v| {
            *sum += v;
            Some(*sum)
        })
        .collect();
    AccumulatedSeries(acc)
}

/// First differences, restoring `x(0)` from `x(1)`. Fails if the result is
/// not a valid (positive) observation series.
pub fn iago(acc: &AccumulatedSeries) -> Result<ObservationSeries> {
    let v = acc.values();
    let mut out = Vec::with_capacity(v.len());
    out.push(v[0]);
    out.extend(v.windows(2).map(|w| w[1] - w[0]));
    ObservationSeries::new(out)
}

/// Adjacent midpoints `z(k) = (x(1)(k−1) + x(1)(k)) / 2`.
pub fn mean_sequence(acc: &AccumulatedSeries) -> Result<MeanSequence> {
    let v = acc.values();
    if v.len() < 2 {
        return Err(GreyError::Domain(format!("mean sequence needs at least 2 accumulated values, got {}", v.len())));
    }
    Ok(MeanSequence(v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()))
}

//! Regression pairs `(Y, B)` for each model variant over a data window.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};
use crate::sequences::{accumulate, mean_sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "GM11")]
    Gm11,
    #[serde(rename = "GVM")]
    Gvm,
    #[serde(rename = "GM_SIN")]
    GmSin,
    #[serde(rename = "GM_COS")]
    GmCos,
    #[serde(rename = "GM_SINCOS")]
    GmSinCos,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Gm11, ModelKind::Gvm, ModelKind::GmSin, ModelKind::GmCos, ModelKind::GmSinCos];

    pub fn is_trigonometric(self) -> bool {
        matches!(self, ModelKind::GmSin | ModelKind::GmCos | ModelKind::GmSinCos)
    }

    /// Parameter each design column estimates, in column order.
    pub fn roles(self) -> &'static [ColumnRole] {
        use ColumnRole::*;
        match self {
            ModelKind::Gm11 | ModelKind::Gvm => &[A, B],
            ModelKind::GmSin | ModelKind::GmCos => &[A, B1, B2],
            ModelKind::GmSinCos => &[A, B1, B2, B3],
        }
    }

    pub fn columns(self) -> usize {
        self.roles().len()
    }

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Gm11 => "GM11",
            ModelKind::Gvm => "GVM",
            ModelKind::GmSin => "GM_SIN",
            ModelKind::GmCos => "GM_COS",
            ModelKind::GmSinCos => "GM_SINCOS",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.trim().to_ascii_uppercase().chars().filter(|c| *c != '_' && *c != '-').collect();
        Ok(match norm.as_str() {
            "GM11" => ModelKind::Gm11,
            "GVM" => ModelKind::Gvm,
            "GMSIN" => ModelKind::GmSin,
            "GMCOS" => ModelKind::GmCos,
            "GMSINCOS" => ModelKind::GmSinCos,
            _ => return Err(GreyError::Config(format!("unknown model `{s}`"))),
        })
    }
}

/// Which parameter a design column estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnRole {
    /// Development coefficient; the column holds `−z`, so its coefficient is `a`.
    A,
    /// GM11 intercept or GVM quadratic coefficient.
    B,
    B1,
    B2,
    B3,
}

impl ColumnRole {
    pub fn label(self) -> &'static str {
        match self {
            ColumnRole::A => "a",
            ColumnRole::B => "b",
            ColumnRole::B1 => "b1",
            ColumnRole::B2 => "b2",
            ColumnRole::B3 => "b3",
        }
    }
}

/// Time index used in trigonometric columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeIndex {
    /// `t = 1..w` restarting in every window.
    #[default]
    Local,
    /// `t` is the observation's position in the full series.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSystem {
    pub kind: ModelKind,
    pub targets: DVector<f64>,
    pub regressors: DMatrix<f64>,
    /// Background values `z(2..n)`.
    pub background: Vec<f64>,
    /// `t_k` for each row.
    pub time_indices: Vec<f64>,
    pub omega: Option<f64>,
}

impl DesignSystem {
    pub fn roles(&self) -> &'static [ColumnRole] {
        self.kind.roles()
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    /// Same data, trigonometric columns re-evaluated at `omega`.
    pub fn with_omega(&self, omega: f64) -> DesignSystem {
        let mut out = self.clone();
        if self.kind.is_trigonometric() {
            fill_regressors(self.kind, &self.background, &self.time_indices, omega, &mut out.regressors);
            out.omega = Some(omega);
        }
        out
    }

    /// One design row written into `row` (length = columns).
    pub(crate) fn row_into(kind: ModelKind, z: f64, t: f64, omega: f64, row: &mut [f64]) {
        row[0] = -z;
        match kind {
            ModelKind::Gm11 => row[1] = 1.0,
            ModelKind::Gvm => row[1] = z * z,
            ModelKind::GmSin => {
                row[1] = (omega * t).sin();
                row[2] = 1.0;
            }
            ModelKind::GmCos => {
                row[1] = (omega * t).cos();
                row[2] = 1.0;
            }
            ModelKind::GmSinCos => {
                let (s, c) = (omega * t).sin_cos();
                row[1] = s;
                row[2] = c;
                row[3] = 1.0;
            }
        }
    }
}

fn fill_regressors(kind: ModelKind, z: &[f64], t: &[f64], omega: f64, m: &mut DMatrix<f64>) {
    let mut row = [0.0; 4];
    for (i, (&zk, &tk)) in z.iter().zip(t).enumerate() {
        DesignSystem::row_into(kind, zk, tk, omega, &mut row);
        for j in 0..kind.columns() {
            m[(i, j)] = row[j];
        }
    }
}

/// Builds `(Y, B)` with the local time index `t_k = k`.
pub fn build_design(values: &[f64], kind: ModelKind, omega: Option<f64>) -> Result<DesignSystem> {
    build_design_at(values, kind, omega, 1.0)
}

/// Builds `(Y, B)` where the window's first observation sits at time `origin`,
/// so row `k` (k = 2..n) uses `t_k = origin + k − 1`.
pub fn build_design_at(values: &[f64], kind: ModelKind, omega: Option<f64>, origin: f64) -> Result<DesignSystem> {
    if values.len() < 2 {
        return Err(GreyError::Domain(format!("design needs at least 2 observations, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GreyError::Domain("window has non-finite observations".into()));
    }
    let omega = match (kind.is_trigonometric(), omega) {
        (true, None) => {
            return Err(GreyError::Config(format!("{kind} needs a fixed omega for least squares")));
        }
        (true, Some(w)) if !w.is_finite() => {
            return Err(GreyError::Config(format!("omega must be finite, got {w}")));
        }
        (true, Some(w)) => Some(w),
        (false, _) => None,
    };

    let z = mean_sequence(&accumulate(values))?.values().to_vec();
    let n = z.len();
    let time_indices: Vec<f64> = (0..n).map(|i| origin + (i + 1) as f64).collect();
    let mut regressors = DMatrix::zeros(n, kind.columns());
    fill_regressors(kind, &z, &time_indices, omega.unwrap_or(0.0), &mut regressors);

    Ok(DesignSystem {
        kind,
        targets: DVector::from_column_slice(&values[1..]),
        regressors,
        background: z,
        time_indices,
        omega,
    })
}

//! Least-squares estimation of grey parameters and the fixed-ω grid search.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{ColumnRole, DesignSystem, ModelKind};
use crate::error::{GreyError, Result};
use crate::par::{map_ordered, Execution};
use crate::rolling::{run_rolling, Estimator, OmegaSetting, RollingConfig};
use crate::sequences::ObservationSeries;

/// Development coefficients smaller than this in magnitude are snapped before
/// prediction; `b/a` terms are unusable below it.
pub const EPS_A: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreyParameters {
    pub kind: ModelKind,
    /// Development coefficient (1/step).
    pub a: f64,
    /// Remaining coefficients in column order: `[b]` for GM11/GVM,
    /// `[b1, b2]` or `[b1, b2, b3]` for the trigonometric models.
    pub b: Vec<f64>,
    pub omega: Option<f64>,
    /// Noise precision, Bayesian fits only.
    pub tau: Option<f64>,
}

impl GreyParameters {
    /// Maps a coefficient vector in column order onto named parameters.
    pub fn from_coefficients(kind: ModelKind, coefficients: &[f64], omega: Option<f64>) -> Result<Self> {
        if coefficients.len() != kind.columns() {
            return Err(GreyError::Domain(format!(
                "{kind} has {} coefficients, got {}",
                kind.columns(),
                coefficients.len()
            )));
        }
        Ok(Self {
            kind,
            a: coefficients[0],
            b: coefficients[1..].to_vec(),
            omega: if kind.is_trigonometric() { omega } else { None },
            tau: None,
        })
    }

    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.a).chain(self.b.iter().copied()).collect()
    }

    pub fn get(&self, role: ColumnRole) -> Option<f64> {
        let idx = self.kind.roles().iter().position(|r| *r == role)?;
        Some(self.coefficients()[idx])
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite()
            && self.b.iter().all(|v| v.is_finite())
            && self.omega.is_none_or(f64::is_finite)
            && self.tau.is_none_or(f64::is_finite)
    }

    /// Moves `a` away from zero to `±EPS_A`; returns whether it changed.
    pub fn snap_development(&mut self) -> bool {
        if self.a.abs() >= EPS_A {
            return false;
        }
        self.a = if self.a < 0.0 { -EPS_A } else { EPS_A };
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LseFit {
    pub params: GreyParameters,
    pub rank: usize,
    /// Set when `B` lacks full column rank; `params` is then the minimum-norm minimizer.
    pub rank_deficient: bool,
    pub residual_norm: f64,
}

/// Minimizes `‖Y − Bθ‖₂` through an SVD of `B`.
pub fn solve_lse(design: &DesignSystem) -> Result<LseFit> {
    let b = &design.regressors;
    let y = &design.targets;
    if b.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(GreyError::Domain("design system has non-finite entries".into()));
    }
    if b.iter().all(|v| *v == 0.0) {
        return Err(GreyError::Rank("regressor matrix is identically zero".into()));
    }
    let (m, n) = b.shape();
    let svd = b.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = m.max(n) as f64 * f64::EPSILON * sigma_max;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let theta = svd.solve(y, tol).map_err(|e| GreyError::Rank(e.to_string()))?;
    let residual_norm = (y - b * &theta).norm();
    let params = GreyParameters::from_coefficients(design.kind, theta.as_slice(), design.omega)?;
    if !params.is_finite() {
        return Err(GreyError::Rank("least-squares solution is not finite".into()));
    }
    Ok(LseFit { params, rank, rank_deficient: rank < n, residual_norm })
}

/// Candidate ω values for the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaGrid {
    Range { lo: f64, hi: f64, step: f64 },
    Points(Vec<f64>),
}

impl Default for OmegaGrid {
    fn default() -> Self {
        OmegaGrid::Range { lo: 0.01, hi: 12.0, step: 0.01 }
    }
}

impl OmegaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            OmegaGrid::Range { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && step.is_finite() && *step > 0.0 && hi >= lo) {
                    return Err(GreyError::Config(format!("invalid omega grid {lo}:{hi}:{step}")));
                }
                let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
                // Rounded so that e.g. 4.30 is exactly the literal 4.3.
                (0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect()
            }
            OmegaGrid::Points(p) => p.clone(),
        };
        if pts.is_empty() {
            return Err(GreyError::Config("omega grid is empty".into()));
        }
        if let Some(w) = pts.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(GreyError::Config(format!("omega grid value {w} must be finite and > 0")));
        }
        Ok(pts)
    }
}

impl FromStr for OmegaGrid {
    type Err = GreyError;

    /// `lo:hi:step`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|_| GreyError::Config(format!("bad omega grid `{s}`")));
        match parts.as_slice() {
            [lo, hi, step] => Ok(OmegaGrid::Range { lo: parse(lo)?, hi: parse(hi)?, step: parse(step)? }),
            _ => Err(GreyError::Config(format!("omega grid must be lo:hi:step, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchResult {
    pub omega: f64,
    pub mse: f64,
}

/// Picks the ω minimizing rolling one-step LSE MSE over `series`. Ties go to
/// the smaller ω.
/// Window, model and time-index convention come from `template`.
pub fn grid_search_omega(
    series: &ObservationSeries,
    template: &RollingConfig,
    grid: &OmegaGrid,
    execution: Execution,
) -> Result<GridSearchResult> {
    let kind = template.kind;
    if !kind.is_trigonometric() {
        return Err(GreyError::Config(format!("{kind} has no omega to search")));
    }
    let mut points = grid.points()?;
    points.sort_by(f64::total_cmp);
    let scores = map_ordered(&points, execution, |&omega| {
        let config = RollingConfig { estimator: Estimator::Lse, omega: OmegaSetting::Fixed(omega), ..template.clone() };
        run_rolling(series, &config).map(|r| r.mse)
    });
    let mut best: Option<GridSearchResult> = None;
    for (omega, mse) in points.into_iter().zip(scores) {
        let mse = mse?;
        let mse_key = if mse.is_nan() { f64::INFINITY } else { mse };
        if best.is_none_or(|b| mse_key < b.mse) {
            best = Some(GridSearchResult { omega, mse: mse_key });
        }
    }
    Ok(best.expect("grid has at least one point"))
}

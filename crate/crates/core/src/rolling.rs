//! Rolling-horizon engine: refit on the `w` most recent observations at every
//! step and predict the next one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bayes::{sample_posterior_with_priors, BayesConfig, PosteriorSummary, Priors};
use crate::design::{build_design_at, ModelKind, TimeIndex};
use crate::error::{GreyError, Result};
use crate::lse::{grid_search_omega, solve_lse, GreyParameters, OmegaGrid};
use crate::par::{map_range, Execution};
use crate::predict::predict_next_at;
use crate::sequences::ObservationSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "LSE")]
    Lse,
    #[serde(rename = "BAYES")]
    Bayes,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::Lse => "LSE",
            Estimator::Bayes => "BAYES",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Estimator {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LSE" => Ok(Estimator::Lse),
            "BAYES" | "BRE" => Ok(Estimator::Bayes),
            _ => Err(GreyError::Config(format!("unknown estimator `{s}`"))),
        }
    }
}

/// How least squares gets ω for the trigonometric models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSetting {
    Fixed(f64),
    /// Searched on the run's own series before the rolling pass.
    Grid(OmegaGrid),
}

impl Default for OmegaSetting {
    fn default() -> Self {
        OmegaSetting::Grid(OmegaGrid::default())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// Flat priors in every window.
    #[default]
    Fresh,
    /// Each window's prior is the previous window's posterior (moment matched).
    CarryForward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    pub window: usize,
    pub kind: ModelKind,
    pub estimator: Estimator,
    pub bayes: BayesConfig,
    pub omega: OmegaSetting,
    pub time_index: TimeIndex,
    pub prior_mode: PriorMode,
    /// Evaluate windows in parallel (batch backtests only; ignored with carry-forward priors).
    pub batch_windows: bool,
    pub execution: Execution,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 4,
            kind: ModelKind::Gm11,
            estimator: Estimator::Lse,
            bayes: BayesConfig::default(),
            omega: OmegaSetting::default(),
            time_index: TimeIndex::Local,
            prior_mode: PriorMode::Fresh,
            batch_windows: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// 1-based index of the predicted observation.
    pub k: usize,
    pub timestamp: Option<f64>,
    pub observed: f64,
    pub predicted: f64,
    /// Persistence was used instead of the model.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepParameters {
    pub k: usize,
    pub params: Option<GreyParameters>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunWarning {
    pub k: Option<usize>,
    pub category: String,
    pub detail: String,
}

mod category {
    pub const SHORT_WINDOW: &str = "window shorter than parameter count";
    pub const RANK: &str = "rank-deficient design; minimum-norm solution used";
    pub const SNAPPED: &str = "development coefficient snapped away from zero";
    pub const CONSTANT: &str = "constant window; persistence prediction";
    pub const ESTIMATION: &str = "estimation failed; persistence prediction";
    pub const PREDICTION: &str = "prediction singular; persistence prediction";
    pub const SAMPLER: &str = "sampler tuning";
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingRunResult {
    pub kind: ModelKind,
    pub estimator: Estimator,
    pub window: usize,
    /// ω used by least squares for the trigonometric models.
    pub omega: Option<f64>,
    pub predictions: Vec<PredictionRecord>,
    pub parameters: Vec<StepParameters>,
    pub posteriors: Vec<(usize, PosteriorSummary)>,
    pub mse: f64,
    pub warnings: Vec<RunWarning>,
}

impl RollingRunResult {
    /// Warnings grouped by category, in first-seen order.
    pub fn warning_digest(&self) -> Vec<String> {
        let mut groups: Vec<(&str, usize, Option<usize>)> = Vec::new();
        for w in &self.warnings {
            match groups.iter_mut().find(|g| g.0 == w.category) {
                Some(g) => g.1 += 1,
                None => groups.push((&w.category, 1, w.k)),
            }
        }
        groups
            .into_iter()
            .map(|(cat, count, first)| match first {
                Some(k) => format!("{cat} ({count} windows, first at k={k})"),
                None => cat.to_string(),
            })
            .collect()
    }
}

pub fn mean_squared_error(predictions: &[PredictionRecord]) -> f64 {
    if predictions.is_empty() {
        return f64::NAN;
    }
    predictions.iter().map(|p| (p.predicted - p.observed).powi(2)).sum::<f64>() / predictions.len() as f64
}

struct WindowOutcome {
    predicted: f64,
    fallback: bool,
    params: Option<GreyParameters>,
    posterior: Option<PosteriorSummary>,
    warnings: Vec<(&'static str, String)>,
}

impl WindowOutcome {
    fn persistence(last: f64, category: &'static str, detail: String, params: Option<GreyParameters>) -> Self {
        WindowOutcome { predicted: last, fallback: true, params, posterior: None, warnings: vec![(category, detail)] }
    }
}

pub fn run_rolling(series: &ObservationSeries, config: &RollingConfig) -> Result<RollingRunResult> {
    let values = series.values();
    let (n, w) = (values.len(), config.window);
    if w < 2 {
        return Err(GreyError::Config(format!("window must be ≥ 2, got {w}")));
    }
    if n <= w {
        return Err(GreyError::Domain(format!("series of length {n} is too short for window {w}")));
    }
    if config.estimator == Estimator::Bayes {
        config.bayes.validate()?;
    }

    let mut warnings = Vec::new();
    if w < config.kind.columns() {
        warnings.push(RunWarning {
            k: None,
            category: category::SHORT_WINDOW.into(),
            detail: format!("{} has {} parameters, window is {w}", config.kind, config.kind.columns()),
        });
    }

    let omega = match (config.estimator, config.kind.is_trigonometric(), &config.omega) {
        (Estimator::Lse, true, OmegaSetting::Fixed(omega)) => Some(*omega),
        (Estimator::Lse, true, OmegaSetting::Grid(grid)) => {
            Some(grid_search_omega(series, config, grid, config.execution)?.omega)
        }
        _ => None,
    };

    let steps = n - w;
    let outcomes: Vec<WindowOutcome> = match (config.estimator, config.prior_mode) {
        (Estimator::Bayes, PriorMode::CarryForward) => {
            let mut priors = config.bayes.priors(config.kind);
            let mut out = Vec::with_capacity(steps);
            for idx in 0..steps {
                let outcome = fit_window(values, idx, config, omega, &priors);
                if let Some(post) = &outcome.posterior {
                    priors = Priors::from_posterior(post, config.kind, &config.bayes.priors(config.kind));
                }
                out.push(outcome);
            }
            out
        }
        _ => {
            let priors = config.bayes.priors(config.kind);
            let execution = if config.batch_windows { config.execution } else { Execution::Sequential };
            map_range(steps, execution, |idx| fit_window(values, idx, config, omega, &priors))
        }
    };

    let mut predictions = Vec::with_capacity(steps);
    let mut parameters = Vec::with_capacity(steps);
    let mut posteriors = Vec::new();
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let k = idx + w + 1;
        predictions.push(PredictionRecord {
            k,
            timestamp: series.timestamps().map(|t| t[k - 1]),
            observed: values[k - 1],
            predicted: outcome.predicted,
            fallback: outcome.fallback,
        });
        parameters.push(StepParameters { k, params: outcome.params });
        if let Some(post) = outcome.posterior {
            posteriors.push((k, post));
        }
        warnings.extend(outcome.warnings.into_iter().map(|(category, detail)| RunWarning {
            k: Some(k),
            category: category.into(),
            detail,
        }));
    }
    let mse = mean_squared_error(&predictions);

    Ok(RollingRunResult {
        kind: config.kind,
        estimator: config.estimator,
        window: w,
        omega,
        predictions,
        parameters,
        posteriors,
        mse,
        warnings,
    })
}

/// Fits window `values[idx .. idx + w]` and predicts `values[idx + w]`.
fn fit_window(
    values: &[f64],
    idx: usize,
    config: &RollingConfig,
    omega: Option<f64>,
    priors: &Priors,
) -> WindowOutcome {
    let w = config.window;
    let window = &values[idx..idx + w];
    let last = window[w - 1];
    let origin = match config.time_index {
        TimeIndex::Local => 1.0,
        TimeIndex::Global => (idx + 1) as f64,
    };

    let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if hi - lo <= 1e-12 * hi.abs() {
        return WindowOutcome::persistence(last, category::CONSTANT, format!("all {w} values equal {last}"), None);
    }

    let mut warnings = Vec::new();
    let fitted = match config.estimator {
        Estimator::Lse => build_design_at(window, config.kind, omega, origin).and_then(|d| solve_lse(&d)).map(|fit| {
            if fit.rank_deficient {
                warnings.push((category::RANK, format!("rank {} of {}", fit.rank, config.kind.columns())));
            }
            (fit.params, None)
        }),
        Estimator::Bayes => {
            let init = config.kind.is_trigonometric().then_some(config.bayes.omega_init);
            let bayes = BayesConfig { seed: config.bayes.seed ^ idx as u64, ..config.bayes.clone() };
            build_design_at(window, config.kind, init, origin)
                .and_then(|d| sample_posterior_with_priors(&d, &bayes, priors))
                .and_then(|(chain, summary)| {
                    warnings.extend(chain.warnings.iter().map(|m| (category::SAMPLER, m.clone())));
                    Ok((chain.posterior_mean(config.kind)?, Some(summary)))
                })
        }
    };
    let (mut params, posterior) = match fitted {
        Ok(v) => v,
        Err(e) => return WindowOutcome::persistence(last, category::ESTIMATION, e.to_string(), None),
    };

    let raw_a = params.a;
    if params.snap_development() {
        warnings.push((category::SNAPPED, format!("a = {raw_a:e}")));
    }
    match predict_next_at(&params, window[0], origin, w) {
        Ok(predicted) => WindowOutcome { predicted, fallback: false, params: Some(params), posterior, warnings },
        Err(e) => {
            let mut out = WindowOutcome::persistence(last, category::PREDICTION, e.to_string(), Some(params));
            out.posterior = posterior;
            warnings.append(&mut out.warnings);
            out.warnings = warnings;
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub model: ModelKind,
    pub estimator: Estimator,
    pub mse: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub improvement_pct: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricReport {
    pub entries: Vec<MetricEntry>,
}

/// `100·(mse_LSE − mse_BAYES)/mse_LSE`
pub fn improvement_pct(mse_lse: f64, mse_bayes: f64) -> Option<f64> {
    (mse_lse != 0.0).then(|| 100.0 * (mse_lse - mse_bayes) / mse_lse)
}

impl MetricReport {
    /// Fills `improvement_pct` on every Bayesian entry that has a least-squares
    /// entry for the same model.
    pub fn from_entries(mut entries: Vec<MetricEntry>) -> Self {
        let lse: Vec<(ModelKind, f64)> =
            entries.iter().filter(|e| e.estimator == Estimator::Lse).map(|e| (e.model, e.mse)).collect();
        for e in entries.iter_mut() {
            e.improvement_pct = match e.estimator {
                Estimator::Bayes => {
                    lse.iter().find(|(m, _)| *m == e.model).and_then(|(_, base)| improvement_pct(*base, e.mse))
                }
                Estimator::Lse => None,
            };
        }
        MetricReport { entries }
    }

    pub fn mse(&self, model: ModelKind, estimator: Estimator) -> Option<f64> {
        self.entries.iter().find(|e| e.model == model && e.estimator == estimator).map(|e| e.mse)
    }

    pub fn improvement(&self, model: ModelKind) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.model == model && e.estimator == Estimator::Bayes)
            .and_then(|e| e.improvement_pct)
    }
}

/// MSE table plus Bayesian-over-least-squares improvements. Paired runs must
/// cover the same observations.
pub fn compute_metrics(results: &[RollingRunResult]) -> Result<MetricReport> {
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            if a.kind == b.kind && a.estimator == b.estimator {
                return Err(GreyError::Config(format!("duplicate run for {} / {}", a.kind, a.estimator)));
            }
            if a.kind == b.kind {
                let same = a.predictions.len() == b.predictions.len()
                    && a.predictions.iter().zip(&b.predictions).all(|(p, q)| p.k == q.k && p.observed == q.observed);
                if !same {
                    return Err(GreyError::Config(format!(
                        "{} runs for {} and {} cover different observations",
                        a.kind, a.estimator, b.estimator
                    )));
                }
            }
        }
    }
    Ok(MetricReport::from_entries(
        results
            .iter()
            .map(|r| MetricEntry {
                model: r.kind,
                estimator: r.estimator,
                mse: r.mse,
                improvement_pct: None,
                warnings: r.warning_digest(),
            })
            .collect(),
    ))
}

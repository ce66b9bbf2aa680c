use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bayes::BayesConfig;
use crate::design::{ModelKind, TimeIndex};
use crate::error::{GreyError, Result};
use crate::io::ColumnMapping;
use crate::lse::OmegaGrid;
use crate::par::Execution;
use crate::rolling::{Estimator, OmegaSetting, PriorMode, RollingConfig};

/// Everything needed to reproduce a run. Serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub input: PathBuf,
    pub speed_col: String,
    pub time_col: Option<String>,
    pub models: Vec<ModelKind>,
    pub estimators: Vec<Estimator>,
    pub window: usize,
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Fixed ω for least squares; otherwise `omega_grid` is searched.
    pub omega: Option<f64>,
    pub omega_grid: Option<OmegaGrid>,
    pub out_dir: PathBuf,
    pub time_index: TimeIndex,
    pub prior_mode: PriorMode,
    pub execution: Execution,
}

impl Default for RunManifest {
    fn default() -> Self {
        let bayes = BayesConfig::default();
        Self {
            input: PathBuf::new(),
            speed_col: "speed".into(),
            time_col: None,
            models: ModelKind::ALL.to_vec(),
            estimators: vec![Estimator::Lse, Estimator::Bayes],
            window: 4,
            samples: bayes.samples,
            burn_in: bayes.burn_in,
            seed: bayes.seed,
            omega: None,
            omega_grid: None,
            out_dir: PathBuf::from("out"),
            time_index: TimeIndex::Local,
            prior_mode: PriorMode::Fresh,
            execution: Execution::default(),
        }
    }
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn mapping(&self) -> ColumnMapping {
        ColumnMapping { speed: self.speed_col.clone(), time: self.time_col.clone() }
    }

    pub fn bayes(&self) -> BayesConfig {
        BayesConfig { samples: self.samples, burn_in: self.burn_in, seed: self.seed, ..BayesConfig::default() }
    }

    pub fn omega_setting(&self) -> OmegaSetting {
        match (self.omega, &self.omega_grid) {
            (Some(omega), _) => OmegaSetting::Fixed(omega),
            (None, Some(grid)) => OmegaSetting::Grid(grid.clone()),
            (None, None) => OmegaSetting::default(),
        }
    }

    /// Every (model, estimator) pair, models outermost.
    pub fn configs(&self) -> Vec<RollingConfig> {
        let mut out = Vec::with_capacity(self.models.len() * self.estimators.len());
        for &kind in &self.models {
            for &estimator in &self.estimators {
                out.push(RollingConfig {
                    window: self.window,
                    kind,
                    estimator,
                    bayes: self.bayes(),
                    omega: self.omega_setting(),
                    time_index: self.time_index,
                    prior_mode: self.prior_mode,
                    batch_windows: false,
                    execution: self.execution,
                });
            }
        }
        out
    }

    /// Checks everything that can be checked without reading the input.
    pub fn validate(&self) -> Result<()> {
        if !self.input.is_file() {
            return Err(GreyError::Config(format!("input `{}` does not exist", self.input.display())));
        }
        if self.models.is_empty() || self.estimators.is_empty() {
            return Err(GreyError::Config("at least one model and one estimator are required".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].contains(m) {
                return Err(GreyError::Config(format!("model {m} listed twice")));
            }
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return Err(GreyError::Config(format!("estimator {e} listed twice")));
            }
        }
        if self.window < 2 {
            return Err(GreyError::Config(format!("window must be ≥ 2, got {}", self.window)));
        }
        if self.omega.is_some() && self.omega_grid.is_some() {
            return Err(GreyError::Config("give either a fixed omega or an omega grid, not both".into()));
        }
        if let Some(omega) = self.omega {
            if !(omega.is_finite() && omega >= 0.0) {
                return Err(GreyError::Config(format!("omega must be finite and non-negative, got {omega}")));
            }
        }
        if let Some(grid) = &self.omega_grid {
            grid.points()?;
        }
        if self.estimators.contains(&Estimator::Bayes) {
            self.bayes().validate()?;
        }
        Ok(())
    }
}

//! Bayesian regression for grey parameters.
//!
//! The model is `y_k = Σ_j β_j·B_kj + ε_k`, `ε ~ N(0, 1/τ)`, with independent
//! normal priors on every coefficient (precision parametrization), a gamma
//! prior on `τ`, and for the trigonometric models a chi-squared prior on `ω`.
//! Each sweep updates
//!
//! 1. `β | τ, ω` exactly from its multivariate-normal full conditional,
//! 2. `τ | β, ω` exactly from its gamma full conditional,
//! 3. `ω | β, τ` by random-walk Metropolis on `log ω`,
//!
//! with the Metropolis step size adapted during burn-in only.

mod dense;
mod summary;

pub use summary::{quantile, summarize, summarize_values, NodeSummary, PosteriorSummary};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::{DesignSystem, ModelKind};
use crate::error::{GreyError, Result};
use crate::lse::{solve_lse, GreyParameters};
use dense::{backward, cholesky, forward, Square, Vector, MAX_DIM};

const ADAPT_BATCH: usize = 50;
const ADAPT_GAIN: f64 = 3.0;
const SD_FLOOR: f64 = 1e-7;
const SD_CEILING: f64 = 50.0;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OmegaPrior {
    ChiSquared { df: f64 },
    Uniform { max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BayesConfig {
    /// Total sweeps, burn-in included.
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub coefficient_precision: f64,
    pub tau_shape: f64,
    pub tau_rate: f64,
    pub omega_prior: OmegaPrior,
    pub omega_proposal_sd: f64,
    pub omega_init: f64,
    pub target_acceptance: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            burn_in: 500,
            seed: 0,
            coefficient_precision: 1e-4,
            tau_shape: 1e-3,
            tau_rate: 1e-3,
            omega_prior: OmegaPrior::ChiSquared { df: 1e-3 },
            omega_proposal_sd: 0.25,
            omega_init: 1.0,
            target_acceptance: 0.4,
        }
    }
}

impl BayesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples <= self.burn_in {
            return Err(GreyError::Config(format!(
                "samples ({}) must exceed burn-in ({}) so draws are retained",
                self.samples, self.burn_in
            )));
        }
        let positive = [
            ("coefficient precision", self.coefficient_precision),
            ("tau shape", self.tau_shape),
            ("tau rate", self.tau_rate),
            ("omega proposal sd", self.omega_proposal_sd),
            ("omega init", self.omega_init),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(GreyError::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        match self.omega_prior {
            OmegaPrior::ChiSquared { df } if !(df > 0.0 && df.is_finite()) => {
                Err(GreyError::Config(format!("chi-squared df must be > 0, got {df}")))
            }
            OmegaPrior::Uniform { max } if !(max > 0.0 && max.is_finite()) => {
                Err(GreyError::Config(format!("uniform omega bound must be > 0, got {max}")))
            }
            _ if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) => {
                Err(GreyError::Config("target acceptance must lie in (0, 1)".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn retained(&self) -> usize {
        self.samples.saturating_sub(self.burn_in)
    }

    pub fn priors(&self, kind: ModelKind) -> Priors {
        let p = kind.columns();
        Priors {
            coefficient_mean: vec![0.0; p],
            coefficient_precision: vec![self.coefficient_precision; p],
            tau_shape: self.tau_shape,
            tau_rate: self.tau_rate,
            omega: self.omega_prior,
        }
    }
}

/// Per-coefficient priors; usually the flat defaults from [`BayesConfig`],
/// or the previous window's posterior when carrying forward.
#[derive(Debug, Clone, PartialEq)]
pub struct Priors {
    pub coefficient_mean: Vec<f64>,
    pub coefficient_precision: Vec<f64>,
    pub tau_shape: f64,
    pub tau_rate: f64,
    pub omega: OmegaPrior,
}

impl Priors {
    /// Normal/gamma moment match to a posterior summary. Nodes missing from
    /// the summary keep `fallback`'s values.
    pub fn from_posterior(summary: &PosteriorSummary, kind: ModelKind, fallback: &Priors) -> Priors {
        let mut out = fallback.clone();
        for (j, role) in kind.roles().iter().enumerate() {
            if let Some(node) = summary.node(role.label()) {
                if node.mean.is_finite() && node.sd.is_finite() && node.sd > 0.0 {
                    out.coefficient_mean[j] = node.mean;
                    out.coefficient_precision[j] = 1.0 / (node.sd * node.sd);
                }
            }
        }
        if let Some(tau) = summary.node("tau") {
            let var = tau.sd * tau.sd;
            if tau.mean > 0.0 && var > 0.0 && (tau.mean / var).is_finite() {
                out.tau_shape = tau.mean * tau.mean / var;
                out.tau_rate = tau.mean / var;
            }
        }
        out
    }
}

/// Retained draws, one row per sweep, columns named by `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub nodes: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    pub deviance: Vec<f64>,
    /// Metropolis acceptance rate for ω over retained sweeps.
    pub omega_acceptance: Option<f64>,
    /// ω proposal sd after burn-in adaptation.
    pub proposal_sd: Option<f64>,
    pub warnings: Vec<String>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn node_values(&self, index: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[index]).collect()
    }

    /// Posterior-mean point estimate.
    pub fn posterior_mean(&self, kind: ModelKind) -> Result<GreyParameters> {
        if self.is_empty() {
            return Err(GreyError::Config("chain has no retained draws".into()));
        }
        let n = self.len() as f64;
        let mean = |i: usize| self.draws.iter().map(|d| d[i]).sum::<f64>() / n;
        let coefs: Vec<f64> = (0..kind.columns()).map(mean).collect();
        let omega = self.node_index("omega").map(mean);
        let mut params = GreyParameters::from_coefficients(kind, &coefs, omega)?;
        params.tau = self.node_index("tau").map(mean);
        Ok(params)
    }
}

/// Draws from the posterior with the flat priors of `config`.
pub fn sample_posterior(design: &DesignSystem, config: &BayesConfig) -> Result<(Chain, PosteriorSummary)> {
    sample_posterior_with_priors(design, config, &config.priors(design.kind))
}

pub fn sample_posterior_with_priors(
    design: &DesignSystem,
    config: &BayesConfig,
    priors: &Priors,
) -> Result<(Chain, PosteriorSummary)> {
    config.validate()?;
    let mut sampler = Sampler::new(design, config, priors)?;
    let chain = sampler.run(config);
    let summary = summarize(&chain)?;
    Ok((chain, summary))
}

struct Sampler<'a> {
    design: &'a DesignSystem,
    priors: &'a Priors,
    p: usize,
    rows: Vec<Vector>,
    gram: Square,
    cross: Vector,
    beta: Vector,
    tau: f64,
    omega: f64,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(design: &'a DesignSystem, config: &BayesConfig, priors: &'a Priors) -> Result<Self> {
        let p = design.kind.columns();
        debug_assert!(p <= MAX_DIM);
        if priors.coefficient_mean.len() != p || priors.coefficient_precision.len() != p {
            return Err(GreyError::Config(format!("priors sized for the wrong model (need {p})")));
        }
        let omega = if design.kind.is_trigonometric() { config.omega_init } else { 0.0 };
        let mut s = Sampler {
            design,
            priors,
            p,
            rows: Vec::with_capacity(design.rows()),
            gram: [0.0; MAX_DIM * MAX_DIM],
            cross: [0.0; MAX_DIM],
            beta: [0.0; MAX_DIM],
            tau: 1.0,
            omega,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        };
        s.rows = s.build_rows(omega);
        s.refresh_normal_equations();
        s.initialize()?;
        Ok(s)
    }

    fn n(&self) -> usize {
        self.design.rows()
    }

    fn build_rows(&self, omega: f64) -> Vec<Vector> {
        let d = self.design;
        if !d.kind.is_trigonometric() {
            return (0..d.rows())
                .map(|i| {
                    let mut r = [0.0; MAX_DIM];
                    for (j, v) in r.iter_mut().take(self.p).enumerate() {
                        *v = d.regressors[(i, j)];
                    }
                    r
                })
                .collect();
        }
        d.background
            .iter()
            .zip(&d.time_indices)
            .map(|(&z, &t)| {
                let mut r = [0.0; MAX_DIM];
                DesignSystem::row_into(d.kind, z, t, omega, &mut r);
                r
            })
            .collect()
    }

    fn refresh_normal_equations(&mut self) {
        let p = self.p;
        self.gram = [0.0; MAX_DIM * MAX_DIM];
        self.cross = [0.0; MAX_DIM];
        for (row, y) in self.rows.iter().zip(self.design.targets.iter()) {
            for i in 0..p {
                self.cross[i] += row[i] * y;
                for j in 0..p {
                    self.gram[i * MAX_DIM + j] += row[i] * row[j];
                }
            }
        }
    }

    fn rss(&self, rows: &[Vector], beta: &Vector) -> f64 {
        rows.iter()
            .zip(self.design.targets.iter())
            .map(|(r, y)| {
                let fit: f64 = (0..self.p).map(|j| r[j] * beta[j]).sum();
                (y - fit).powi(2)
            })
            .sum()
    }

    fn log_likelihood(&self) -> f64 {
        let n = self.n() as f64;
        0.5 * n * (self.tau.ln() - LN_2PI) - 0.5 * self.tau * self.rss(&self.rows, &self.beta)
    }

    /// Least-squares warm start when the design has full column rank.
    fn initialize(&mut self) -> Result<()> {
        let n = self.n();
        if n > 0 {
            let design = self.design.with_omega(self.omega);
            if let Ok(fit) = solve_lse(&design) {
                if !fit.rank_deficient {
                    for (j, v) in fit.params.coefficients().iter().enumerate() {
                        self.beta[j] = *v;
                    }
                }
            }
            let rss = self.rss(&self.rows, &self.beta);
            let dof = n.saturating_sub(self.p);
            self.tau = if dof > 0 && rss > 1e-300 { dof as f64 / rss } else { 1.0 };
        }
        if !self.log_likelihood().is_finite() {
            self.beta = [0.0; MAX_DIM];
            self.tau = 1.0;
        }
        if !self.log_likelihood().is_finite() {
            return Err(GreyError::Init("log-likelihood is not finite at the initial state".into()));
        }
        Ok(())
    }

    fn draw_coefficients(&mut self) {
        let p = self.p;
        let mut q = [0.0; MAX_DIM * MAX_DIM];
        let mut rhs = [0.0; MAX_DIM];
        for i in 0..p {
            for j in 0..p {
                q[i * MAX_DIM + j] = self.tau * self.gram[i * MAX_DIM + j];
            }
            let lambda = self.priors.coefficient_precision[i];
            q[i * MAX_DIM + i] += lambda;
            rhs[i] = self.tau * self.cross[i] + lambda * self.priors.coefficient_mean[i];
        }
        let Some(l) = cholesky(&q, p) else {
            // Only reachable through overflow in τ·BᵀB; keep the current draw.
            return;
        };
        let mean = backward(&l, &forward(&l, &rhs, p), p);
        let mut noise = [0.0; MAX_DIM];
        for v in noise.iter_mut().take(p) {
            *v = self.rng.sample(StandardNormal);
        }
        let offset = backward(&l, &noise, p);
        for j in 0..p {
            self.beta[j] = mean[j] + offset[j];
        }
    }

    fn draw_precision(&mut self) {
        let shape = self.priors.tau_shape + 0.5 * self.n() as f64;
        let rate = self.priors.tau_rate + 0.5 * self.rss(&self.rows, &self.beta);
        self.tau = sample_gamma(&mut self.rng, shape, rate);
    }

    fn log_omega_target(&self, log_omega: f64, rss: f64) -> f64 {
        let omega = log_omega.exp();
        let prior = match self.priors.omega {
            // Chi-squared density times the log-scale Jacobian ω.
            OmegaPrior::ChiSquared { df } => 0.5 * df * log_omega - 0.5 * omega,
            OmegaPrior::Uniform { max } if omega < max => log_omega,
            OmegaPrior::Uniform { .. } => f64::NEG_INFINITY,
        };
        prior - 0.5 * self.tau * rss
    }

    /// Returns whether the proposal was accepted.
    fn step_omega(&mut self, sd: f64) -> bool {
        let current = self.omega.ln();
        let z: f64 = self.rng.sample(StandardNormal);
        let proposal = current + sd * z;
        let u: f64 = self.rng.random();
        let candidate_rows = self.build_rows(proposal.exp());
        let log_ratio = self.log_omega_target(proposal, self.rss(&candidate_rows, &self.beta))
            - self.log_omega_target(current, self.rss(&self.rows, &self.beta));
        if u.ln() < log_ratio {
            self.omega = proposal.exp();
            self.rows = candidate_rows;
            self.refresh_normal_equations();
            true
        } else {
            false
        }
    }

    fn run(&mut self, config: &BayesConfig) -> Chain {
        let trig = self.design.kind.is_trigonometric();
        let mut nodes: Vec<String> = self.design.kind.roles().iter().map(|r| r.label().to_string()).collect();
        if trig {
            nodes.push("omega".into());
        }
        nodes.push("tau".into());

        let mut sd = config.omega_proposal_sd;
        let (mut batch_accepts, mut kept_accepts) = (0usize, 0usize);
        let mut draws = Vec::with_capacity(config.retained());
        let mut deviance = Vec::with_capacity(config.retained());
        let n = self.n() as f64;

        for sweep in 0..config.samples {
            self.draw_coefficients();
            self.draw_precision();
            if trig {
                let accepted = self.step_omega(sd);
                if sweep < config.burn_in {
                    batch_accepts += accepted as usize;
                    if (sweep + 1) % ADAPT_BATCH == 0 {
                        let rate = batch_accepts as f64 / ADAPT_BATCH as f64;
                        sd = (sd * (ADAPT_GAIN * (rate - config.target_acceptance)).exp()).clamp(SD_FLOOR, SD_CEILING);
                        batch_accepts = 0;
                    }
                } else {
                    kept_accepts += accepted as usize;
                }
            }
            if sweep >= config.burn_in {
                let mut row: Vec<f64> = self.beta[..self.p].to_vec();
                if trig {
                    row.push(self.omega);
                }
                row.push(self.tau);
                draws.push(row);
                let rss = self.rss(&self.rows, &self.beta);
                deviance.push(n * LN_2PI - n * self.tau.ln() + self.tau * rss);
            }
        }

        let mut warnings = Vec::new();
        let omega_acceptance = trig.then(|| kept_accepts as f64 / config.retained() as f64);
        if let Some(rate) = omega_acceptance {
            if !(0.05..=0.95).contains(&rate) {
                warnings.push(format!("omega acceptance rate {rate:.3} outside (0.05, 0.95); proposal poorly tuned"));
            }
        }
        Chain { nodes, draws, deviance, omega_acceptance, proposal_sd: trig.then_some(sd), warnings }
    }
}

/// Gamma(shape, rate) draw kept strictly positive. Small shapes are drawn on the
/// log scale (`G(α+1)·U^{1/α}`) because the direct draw underflows to zero.
fn sample_gamma(rng: &mut ChaCha8Rng, shape: f64, rate: f64) -> f64 {
    let value = if shape < 1.0 {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape").sample(rng);
        let u: f64 = 1.0 - rng.random::<f64>();
        (g.ln() + u.ln() / shape - rate.ln()).exp()
    } else {
        Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters").sample(rng)
    };
    value.max(f64::MIN_POSITIVE)
}

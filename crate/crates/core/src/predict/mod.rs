//! One-step-ahead time responses for the five whitenization equations.
//!
//! Every linear model shares `dx/dt + a·x = s·sin(ωt) + c·cos(ωt) + d`, solved
//! with the initial condition `x(1)(t₁) = x(0)(1)`:
//!
//! ```text
//! x(1)(t) = (x(0)(1) − q(t₁))·e^{−a(t−t₁)} + d·(1 − e^{−a(t−t₁)})/a + q(t)
//! q(t)    = A·sin(ωt) + B·cos(ωt),  A = (a·s + ω·c)/(a²+ω²),  B = (a·c − ω·s)/(a²+ω²)
//! ```
//!
//! and the Verhulst model `dx/dt + a·x = b·x²` has
//! `x(1)(t) = x(0)(1) / (e^{aτ} − b·x(0)(1)·(e^{aτ} − 1)/a)`, `τ = t − t₁`.
//!
//! The prediction `x̂(0)(k+1)` is `x̂(1)(t₁+k) − x̂(1)(t₁+k−1)`. These forms are
//! checked against RK4 integration in [`ode`]; several commonly printed
//! variants (homogeneous term `C·e^{−t}`, an extra `ω` in the sine particular
//! solution, the product form of the Verhulst difference) do not solve their
//! ODEs and are not used.

pub mod ode;

pub use ode::{ode_oracle, Trajectory, WhitenizationOde};

use crate::design::ModelKind;
use crate::error::{GreyError, Result};
use crate::lse::{GreyParameters, EPS_A};

/// Smallest admissible Verhulst denominator before the response is treated as
/// having passed through a pole.
const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct LinearForcing {
    sin: f64,
    cos: f64,
    constant: f64,
    omega: f64,
}

fn check(params: &GreyParameters, k: usize) -> Result<()> {
    if k < 1 {
        return Err(GreyError::Domain("prediction step k must be ≥ 1".into()));
    }
    if !params.is_finite() {
        return Err(GreyError::Domain("parameters must be finite".into()));
    }
    if params.a.abs() < EPS_A {
        return Err(GreyError::Singular { step: k, reason: format!("|a| = {:e} is below {EPS_A:e}", params.a.abs()) });
    }
    if params.b.len() + 1 != params.kind.columns() {
        return Err(GreyError::Domain(format!("{} needs {} coefficients", params.kind, params.kind.columns())));
    }
    Ok(())
}

fn expect_kind(params: &GreyParameters, kind: ModelKind) -> Result<()> {
    if params.kind != kind {
        return Err(GreyError::Config(format!("{kind} predictor given {} parameters", params.kind)));
    }
    Ok(())
}

fn linear_forcing(params: &GreyParameters) -> Result<LinearForcing> {
    let b = &params.b;
    let omega = || {
        params
            .omega
            .filter(|w| w.is_finite())
            .ok_or_else(|| GreyError::Config(format!("{} prediction needs omega", params.kind)))
    };
    Ok(match params.kind {
        ModelKind::Gm11 => LinearForcing { sin: 0.0, cos: 0.0, constant: b[0], omega: 0.0 },
        ModelKind::GmSin => LinearForcing { sin: b[0], cos: 0.0, constant: b[1], omega: omega()? },
        ModelKind::GmCos => LinearForcing { sin: 0.0, cos: b[0], constant: b[1], omega: omega()? },
        ModelKind::GmSinCos => LinearForcing { sin: b[0], cos: b[1], constant: b[2], omega: omega()? },
        ModelKind::Gvm => unreachable!("Verhulst forcing is not linear"),
    })
}

impl LinearForcing {
    /// Periodic part of the particular solution.
    fn periodic(&self, a: f64, t: f64) -> f64 {
        if self.sin == 0.0 && self.cos == 0.0 {
            return 0.0;
        }
        let w = self.omega;
        let denom = a * a + w * w;
        let amp_sin = (a * self.sin + w * self.cos) / denom;
        let amp_cos = (a * self.cos - w * self.sin) / denom;
        let (s, c) = (w * t).sin_cos();
        amp_sin * s + amp_cos * c
    }
}

/// `(1 − e^{−a·τ}) / a`, accurate for small `a`.
fn relaxation(a: f64, tau: f64) -> f64 {
    -(-a * tau).exp_m1() / a
}

fn linear_response(params: &GreyParameters, x0: f64, origin: f64, t: f64) -> Result<f64> {
    let f = linear_forcing(params)?;
    let a = params.a;
    let tau = t - origin;
    Ok((x0 - f.periodic(a, origin)) * (-a * tau).exp() + f.constant * relaxation(a, tau) + f.periodic(a, t))
}

fn linear_step(params: &GreyParameters, x0: f64, origin: f64, k: usize) -> Result<f64> {
    let f = linear_forcing(params)?;
    let a = params.a;
    let decay = (-a * (k - 1) as f64).exp();
    let transient = (x0 - f.periodic(a, origin)) * decay * (-a).exp_m1() + f.constant * relaxation(a, 1.0) * decay;
    let t = origin + k as f64;
    Ok(transient + f.periodic(a, t) - f.periodic(a, t - 1.0))
}

fn verhulst_denominator(params: &GreyParameters, x0: f64, tau: f64) -> f64 {
    let a = params.a;
    let b = params.b[0];
    (a * tau).exp() - b * x0 * (a * tau).exp_m1() / a
}

fn verhulst_response(params: &GreyParameters, x0: f64, tau: f64, step: usize) -> Result<f64> {
    let d = verhulst_denominator(params, x0, tau);
    // The denominator starts at 1 and is monotone in τ, so a positive value
    // means no pole was crossed on the way.
    if d.is_nan() || d <= POLE_TOLERANCE {
        return Err(GreyError::Singular { step, reason: format!("Verhulst denominator is {d:e} at τ = {tau}") });
    }
    Ok(x0 / d)
}

/// Accumulated time response `x̂(1)(t)` with `x̂(1)(origin) = x0`.
pub fn time_response(params: &GreyParameters, x0: f64, origin: f64, t: f64) -> Result<f64> {
    check(params, 1)?;
    match params.kind {
        ModelKind::Gvm => verhulst_response(params, x0, t - origin, 0),
        _ => linear_response(params, x0, origin, t),
    }
}

/// `x̂(0)(k+1)` for any model, local time (`t₁ = 1`).
pub fn predict_next(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    predict_next_at(params, x0, 1.0, k)
}

/// `x̂(0)(k+1)` when the anchoring observation sits at time `origin`.
pub fn predict_next_at(params: &GreyParameters, x0: f64, origin: f64, k: usize) -> Result<f64> {
    check(params, k)?;
    let value = match params.kind {
        ModelKind::Gvm => {
            let hi = verhulst_response(params, x0, k as f64, k)?;
            let lo = verhulst_response(params, x0, (k - 1) as f64, k)?;
            hi - lo
        }
        _ => linear_step(params, x0, origin, k)?,
    };
    if !value.is_finite() {
        return Err(GreyError::Singular { step: k, reason: "prediction overflowed".into() });
    }
    Ok(value)
}

/// `(1 − e^a)(x(0)(1) − b/a)·e^{−ak}`.
pub fn predict_gm11(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    expect_kind(params, ModelKind::Gm11)?;
    predict_next(params, x0, k)
}

/// Differenced logistic response of `dx/dt + a·x = b·x²`.
pub fn predict_gvm(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    expect_kind(params, ModelKind::Gvm)?;
    predict_next(params, x0, k)
}

pub fn predict_gm_sin(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    expect_kind(params, ModelKind::GmSin)?;
    predict_next(params, x0, k)
}

pub fn predict_gm_cos(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    expect_kind(params, ModelKind::GmCos)?;
    predict_next(params, x0, k)
}

pub fn predict_gm_sincos(params: &GreyParameters, x0: f64, k: usize) -> Result<f64> {
    expect_kind(params, ModelKind::GmSinCos)?;
    predict_next(params, x0, k)
}

/// Integration constant `C` of `x(1)(t) = C·e^{−at} + particular(t)` for the
/// linear models, from `x(1)(origin) = x0`.
pub fn integration_constant(params: &GreyParameters, x0: f64, origin: f64) -> Result<f64> {
    check(params, 1)?;
    if params.kind == ModelKind::Gvm {
        return Err(GreyError::Config("Verhulst response has no additive constant".into()));
    }
    let f = linear_forcing(params)?;
    let a = params.a;
    Ok((a * origin).exp() * (x0 - f.periodic(a, origin) - f.constant / a))
}

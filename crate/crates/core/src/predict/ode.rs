//! Fixed-step RK4 integration of the whitenization equations, used as an
//! independent check on the closed-form predictors.

use crate::design::ModelKind;
use crate::error::{GreyError, Result};
use crate::lse::GreyParameters;

#[derive(Debug, Clone)]
pub struct WhitenizationOde {
    pub params: GreyParameters,
    /// `x(1)(origin) = x(0)(1)`.
    pub x0: f64,
    pub origin: f64,
}

impl WhitenizationOde {
    pub fn new(params: GreyParameters, x0: f64) -> Self {
        Self { params, x0, origin: 1.0 }
    }

    /// `dx/dt = f(t, x) − a·x`
    pub fn rate(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let b = &p.b;
        let w = p.omega.unwrap_or(0.0);
        let forcing = match p.kind {
            ModelKind::Gm11 => b[0],
            ModelKind::Gvm => b[0] * x * x,
            ModelKind::GmSin => b[0] * (w * t).sin() + b[1],
            ModelKind::GmCos => b[0] * (w * t).cos() + b[1],
            ModelKind::GmSinCos => b[0] * (w * t).sin() + b[1] * (w * t).cos() + b[2],
        };
        forcing - p.a * x
    }
}

/// `x(1)` sampled at `origin, origin + 1, …` up to `t_end`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    /// `x(0)(k+1) = x(1)(k+1) − x(1)(k)` for `k = 1..`.
    pub fn differenced(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn ode_oracle(ode: &WhitenizationOde, t_end: f64, step: f64) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GreyError::Config(format!("RK4 step must be positive, got {step}")));
    }
    if t_end.is_nan() || t_end < ode.origin {
        return Err(GreyError::Config(format!("t_end {t_end} precedes origin {}", ode.origin)));
    }
    let substeps = (1.0 / step).ceil() as usize;
    let h = 1.0 / substeps as f64;
    let units = (t_end - ode.origin).floor() as usize;

    let mut times = vec![ode.origin];
    let mut values = vec![ode.x0];
    let mut x = ode.x0;
    for unit in 0..units {
        let t0 = ode.origin + unit as f64;
        for i in 0..substeps {
            let t = t0 + i as f64 * h;
            let k1 = ode.rate(t, x);
            let k2 = ode.rate(t + 0.5 * h, x + 0.5 * h * k1);
            let k3 = ode.rate(t + 0.5 * h, x + 0.5 * h * k2);
            let k4 = ode.rate(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !x.is_finite() || x.abs() > 1e300 {
                return Err(GreyError::Divergence { t: t + h });
            }
        }
        times.push(t0 + 1.0);
        values.push(x);
    }
    Ok(Trajectory { times, values })
}

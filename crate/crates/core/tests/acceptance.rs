//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Tolerances are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use greycast::bayes::{sample_posterior, BayesConfig};
use greycast::design::{DesignSystem, ModelKind};
use greycast::io::{run, RunManifest};
use greycast::lse::{solve_lse, GreyParameters, EPS_A};
use greycast::par::{map_range, Execution};
use greycast::predict::{ode_oracle, predict_next, WhitenizationOde};
use greycast::rolling::{run_rolling, Estimator, MetricEntry, MetricReport, OmegaSetting, RollingConfig};
use greycast::sequences::ObservationSeries;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const LSE_REL_TOL: f64 = 1e-10;
const LSE_SYSTEMS: usize = 1000;
const LSE_BUDGET: Duration = Duration::from_secs(5);
const ODE_TOL: f64 = 1e-6;
const ODE_STEP: f64 = 1e-3;
const ODE_DRAWS: usize = 100;
const ODE_HORIZON: usize = 10;
const ODE_BUDGET: Duration = Duration::from_secs(30);
const EXACT_SHUTOFF_TOL: f64 = 1e-12;
const COMPONENT_SHUTOFF_TOL: f64 = 1e-10;
const OMEGA_LIMIT_TOL: f64 = 1e-6;
const REFERENCE_COS_TOL: f64 = 1e-3;
const MC_SIGMAS: f64 = 3.0;
const RETAINED_DRAWS: usize = 20_000;
const RECOVERY_MSE: f64 = 1e-8;
const CONSTANT_MSE: f64 = 1e-6;
const IMPROVEMENT_TOL: f64 = 0.02;
const SYNTHETIC_WINS: usize = 8;
const SYNTHETIC_REPLICATIONS: usize = 10;
const SYNTHETIC_BUDGET: Duration = Duration::from_secs(600);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 LSE vs normal equations", lse_oracle),
        ("2 closed form vs RK4", closed_form_vs_ode),
        ("3 reduction lattice", reduction_lattice),
        ("4 sampler vs conjugate posterior", sampler_correctness),
        ("5 exact-recovery backtests", exact_recovery),
        ("6 improvement table arithmetic", improvement_table),
        ("7 synthetic seasonal check", synthetic_seasonal),
        ("8 causality and determinism", causality_and_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {} ({:.1?})", o.detail, start.elapsed());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn params(kind: ModelKind, coefficients: &[f64], omega: Option<f64>) -> GreyParameters {
    GreyParameters::from_coefficients(kind, coefficients, omega).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Gauss–Jordan with partial pivoting on `BᵀB θ = BᵀY`.
fn normal_equations(b: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = b[0].len();
    let mut aug = vec![vec![0.0; p + 1]; p];
    for (row, yi) in b.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                aug[i][j] += row[i] * row[j];
            }
            aug[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&r, &s| aug[r][col].abs().total_cmp(&aug[s][col].abs())).unwrap();
        aug.swap(col, pivot);
        for r in 0..p {
            if r != col {
                let f = aug[r][col] / aug[col][col];
                let pivot_row = aug[col].clone();
                for (v, pv) in aug[r].iter_mut().zip(&pivot_row).skip(col) {
                    *v -= f * pv;
                }
            }
        }
    }
    (0..p).map(|i| aug[i][p] / aug[i][i]).collect()
}

fn raw_design(kind: ModelKind, b: &[Vec<f64>], y: &[f64]) -> DesignSystem {
    let (m, p) = (b.len(), b[0].len());
    DesignSystem {
        kind,
        targets: DVector::from_column_slice(y),
        regressors: DMatrix::from_fn(m, p, |i, j| b[i][j]),
        background: vec![0.0; m],
        time_indices: vec![0.0; m],
        omega: kind.is_trigonometric().then_some(1.0),
    }
}

fn lse_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..LSE_SYSTEMS {
        let p = rng.random_range(2..=4);
        let m = rng.random_range(p.max(3)..=10);
        let kind = match p {
            2 => ModelKind::Gm11,
            3 => ModelKind::GmSin,
            _ => ModelKind::GmSinCos,
        };
        let b: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).collect();
        let y: Vec<f64> = (0..m).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let fit = solve_lse(&raw_design(kind, &b, &y)).unwrap();
        let oracle = normal_equations(&b, &y);
        let got = fit.params.coefficients();
        let num: f64 = got.iter().zip(&oracle).map(|(g, o)| (g - o).powi(2)).sum::<f64>().sqrt();
        let den: f64 = oracle.iter().map(|o| o * o).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= LSE_REL_TOL && elapsed < LSE_BUDGET,
        format!("{LSE_SYSTEMS} systems, worst relative error {worst:.2e} (tol {LSE_REL_TOL:e}), {elapsed:.2?}"),
    )
}

fn random_params(rng: &mut ChaCha8Rng, kind: ModelKind) -> GreyParameters {
    let mut a = uniform(rng, -1.0, 1.0);
    while a.abs() < EPS_A {
        a = uniform(rng, -1.0, 1.0);
    }
    let bs: Vec<f64> = (1..kind.columns()).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let omega = kind.is_trigonometric().then(|| uniform(rng, 0.05, 3.0));
    let mut c = vec![a];
    c.extend(bs);
    params(kind, &c, omega)
}

fn closed_form_vs_ode() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    let mut failures = Vec::new();
    for kind in ModelKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(2 + kind as u64);
        let mut accepted = 0;
        while accepted < ODE_DRAWS {
            let p = random_params(&mut rng, kind);
            let x0 = uniform(&mut rng, 0.5, 2.0);
            let ode = WhitenizationOde::new(p.clone(), x0);
            let closed: Result<Vec<f64>, _> = (1..=ODE_HORIZON).map(|k| predict_next(&p, x0, k)).collect();
            let trajectory = ode_oracle(&ode, 1.0 + ODE_HORIZON as f64, ODE_STEP);
            // Verhulst draws whose solution blows up inside the horizon are not stable.
            let (closed, trajectory) = match (closed, trajectory) {
                (Ok(c), Ok(t)) if t.values.iter().all(|v| v.abs() < 1e6) => (c, t),
                _ if kind == ModelKind::Gvm => {
                    rejected += 1;
                    continue;
                }
                (c, t) => {
                    failures.push(format!("{kind}: {:?} / {:?}", c.err(), t.err()));
                    accepted += 1;
                    continue;
                }
            };
            for (c, o) in closed.iter().zip(trajectory.differenced()) {
                worst = worst.max((c - o).abs());
            }
            accepted += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && worst <= ODE_TOL && elapsed < ODE_BUDGET,
        format!(
            "5 models x {ODE_DRAWS} draws, k <= {ODE_HORIZON}, worst |diff| {worst:.2e} (tol {ODE_TOL:e}), \
             {rejected} unstable Verhulst draws redrawn, {} errors",
            failures.len()
        ),
    )
}

fn reduction_lattice() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = [0.0f64; 8];
    let labels = [
        "SIN b1=0 vs GM11",
        "COS b1=0 vs GM11",
        "SINCOS b1=b2=0 vs GM11",
        "SINCOS b2=0 vs SIN",
        "SINCOS b1=0 vs COS",
        "GVM b=0 vs GM11 b=0",
        "SIN w=1e-8 vs GM11 (a>0)",
        "COS at reference posterior means vs GM11",
    ];
    let tols = [
        EXACT_SHUTOFF_TOL,
        EXACT_SHUTOFF_TOL,
        EXACT_SHUTOFF_TOL,
        COMPONENT_SHUTOFF_TOL,
        COMPONENT_SHUTOFF_TOL,
        COMPONENT_SHUTOFF_TOL,
        OMEGA_LIMIT_TOL,
        REFERENCE_COS_TOL,
    ];
    let scaled = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    let mut growth_worst: f64 = 0.0;
    for _ in 0..200 {
        let a = loop {
            let a = uniform(&mut rng, -1.0, 1.0);
            if a.abs() >= 1e-3 {
                break a;
            }
        };
        let (b1, b2, b3) = (uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0));
        let w = uniform(&mut rng, 0.05, 3.0);
        let x0 = uniform(&mut rng, 0.5, 2.0);
        for k in 1..=ODE_HORIZON {
            let at = |p: GreyParameters| predict_next(&p, x0, k).unwrap();
            let gm = |b: f64| at(params(ModelKind::Gm11, &[a, b], None));
            let pairs = [
                (at(params(ModelKind::GmSin, &[a, 0.0, b2], Some(w))), gm(b2)),
                (at(params(ModelKind::GmCos, &[a, 0.0, b2], Some(w))), gm(b2)),
                (at(params(ModelKind::GmSinCos, &[a, 0.0, 0.0, b3], Some(w))), gm(b3)),
                (
                    at(params(ModelKind::GmSinCos, &[a, b1, 0.0, b3], Some(w))),
                    at(params(ModelKind::GmSin, &[a, b1, b3], Some(w))),
                ),
                (
                    at(params(ModelKind::GmSinCos, &[a, 0.0, b2, b3], Some(w))),
                    at(params(ModelKind::GmCos, &[a, b2, b3], Some(w))),
                ),
                (at(params(ModelKind::Gvm, &[a, 0.0], None)), gm(0.0)),
                (at(params(ModelKind::GmSin, &[a, b1, b2], Some(1e-8))), gm(b2)),
            ];
            for (i, (x, y)) in pairs.iter().enumerate() {
                // The ω → 0 limit is a stable-regime identity: under growth the
                // residual forcing b1·ω·t is amplified by e^{|a|k}.
                if i == 6 && a < 0.0 {
                    growth_worst = growth_worst.max(scaled(*x, *y));
                } else {
                    worst[i] = worst[i].max(scaled(*x, *y));
                }
            }
        }
    }
    // Reference GM_COS posterior means: alpha 23.25, beta1 -0.0024, beta2 30.86, omega 7.8e-5.
    let cos = params(ModelKind::GmCos, &[-0.0024, 30.86, 23.25], Some(7.8e-5));
    let gm = params(ModelKind::Gm11, &[-0.0024, 30.86 + 23.25], None);
    for k in 1..=4 {
        let d = (predict_next(&cos, 60.0, k).unwrap() - predict_next(&gm, 60.0, k).unwrap()).abs();
        worst[7] = worst[7].max(d);
    }
    let pass = worst.iter().zip(&tols).all(|(w, t)| w <= t);
    let detail = labels
        .iter()
        .zip(worst.iter().zip(&tols))
        .map(|(l, (w, t))| format!("{l} {w:.1e}<={t:e}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, format!("{detail}; info: SIN w=1e-8 under growth (a<0) {growth_worst:.1e}"))
}

/// Mean and batch-means standard error.
fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    const BATCHES: usize = 50;
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = n / BATCHES;
    let batch_means: Vec<f64> =
        (0..BATCHES).map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let bm = batch_means.iter().sum::<f64>() / BATCHES as f64;
    let var = batch_means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

/// Posterior moments of (β, τ) under independent N(0, 1/λ) coefficient and
/// Gamma(a0, b0) precision priors, by quadrature over log τ of the exact
/// marginal p(τ | y); β | τ, y is Gaussian in closed form.
struct ConjugateMoments {
    beta_mean: [f64; 2],
    beta_var: [f64; 2],
    tau_mean: f64,
}

fn conjugate_oracle(x: &[[f64; 2]], y: &[f64], lambda: f64, a0: f64, b0: f64) -> ConjugateMoments {
    let n = y.len() as f64;
    let (mut xtx, mut xty, mut yty) = ([[0.0; 2]; 2], [0.0; 2], 0.0);
    for (r, yi) in x.iter().zip(y) {
        for i in 0..2 {
            xty[i] += r[i] * yi;
            for j in 0..2 {
                xtx[i][j] += r[i] * r[j];
            }
        }
        yty += yi * yi;
    }
    // Returns (log marginal density in log τ, conditional mean, conditional covariance).
    let at = |tau: f64| {
        let q = [[tau * xtx[0][0] + lambda, tau * xtx[0][1]], [tau * xtx[1][0], tau * xtx[1][1] + lambda]];
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        let inv = [[q[1][1] / det, -q[0][1] / det], [-q[1][0] / det, q[0][0] / det]];
        let r = [tau * xty[0], tau * xty[1]];
        let m = [inv[0][0] * r[0] + inv[0][1] * r[1], inv[1][0] * r[0] + inv[1][1] * r[1]];
        let quad = tau * yty - (m[0] * r[0] + m[1] * r[1]);
        let log_density = (a0 + 0.5 * n) * tau.ln() - b0 * tau - 0.5 * det.ln() - 0.5 * quad;
        (log_density, m, inv)
    };
    let (lo, hi, steps) = (-20.0f64, 20.0f64, 400_000);
    let h = (hi - lo) / steps as f64;
    let peak = (0..=steps).map(|i| at((lo + i as f64 * h).exp()).0).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m1, mut m2, mut tau_mean) = (0.0, [0.0; 2], [0.0; 2], 0.0);
    for i in 0..=steps {
        let tau = (lo + i as f64 * h).exp();
        let (ld, m, inv) = at(tau);
        let w = (ld - peak).exp() * if i == 0 || i == steps { 0.5 } else { 1.0 };
        z += w;
        tau_mean += w * tau;
        for j in 0..2 {
            m1[j] += w * m[j];
            m2[j] += w * (m[j] * m[j] + inv[j][j]);
        }
    }
    ConjugateMoments {
        beta_mean: [m1[0] / z, m1[1] / z],
        beta_var: [m2[0] / z - (m1[0] / z).powi(2), m2[1] / z - (m1[1] / z).powi(2)],
        tau_mean: tau_mean / z,
    }
}

fn sampler_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    let rows: Vec<[f64; 2]> = xs.iter().map(|x| [*x, 1.0]).collect();
    let y: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    let design = raw_design(ModelKind::Gm11, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), &y);
    let cfg = BayesConfig { samples: RETAINED_DRAWS + 500, burn_in: 500, seed: 42, ..BayesConfig::default() };
    let (chain, _) = sample_posterior(&design, &cfg).unwrap();
    let (chain2, _) = sample_posterior(&design, &cfg).unwrap();
    let identical = chain == chain2;
    let oracle = conjugate_oracle(&rows, &y, cfg.coefficient_precision, cfg.tau_shape, cfg.tau_rate);

    let mut checks = Vec::new();
    let mut z_scores = Vec::new();
    for j in 0..2 {
        let draws = chain.node_values(j);
        let (m, se) = mean_and_se(&draws);
        z_scores.push((format!("mean[{j}]"), (m - oracle.beta_mean[j]) / se));
        let sq: Vec<f64> = draws.iter().map(|d| (d - oracle.beta_mean[j]).powi(2)).collect();
        let (v, se) = mean_and_se(&sq);
        z_scores.push((format!("var[{j}]"), (v - oracle.beta_var[j]) / se));
    }
    let taus = chain.node_values(chain.node_index("tau").unwrap());
    let (tm, se) = mean_and_se(&taus);
    z_scores.push(("tau".into(), (tm - oracle.tau_mean) / se));
    let positive = taus.iter().all(|t| *t > 0.0);

    // Prior only: zero rows, coefficients should follow N(0, 1/λ).
    let empty = DesignSystem {
        kind: ModelKind::Gvm,
        targets: DVector::zeros(0),
        regressors: DMatrix::zeros(0, 2),
        background: vec![],
        time_indices: vec![],
        omega: None,
    };
    let (prior_chain, _) = sample_posterior(&empty, &cfg).unwrap();
    let sd = cfg.coefficient_precision.recip().sqrt();
    for j in 0..2 {
        let draws = prior_chain.node_values(j);
        let (m, se) = mean_and_se(&draws);
        z_scores.push((format!("prior mean[{j}]"), m / se));
        let sq: Vec<f64> = draws.iter().map(|d| d * d).collect();
        let (v, se) = mean_and_se(&sq);
        z_scores.push((format!("prior var[{j}]"), (v - sd * sd) / se));
    }
    let within = z_scores.iter().all(|(_, z)| z.abs() <= MC_SIGMAS);
    checks.push(format!("{} draws", chain.len()));
    checks.extend(z_scores.iter().map(|(n, z)| format!("{n} z={z:+.2}")));
    checks.push(format!("tau>0 {positive}"));
    checks.push(format!("bit-identical {identical}"));
    outcome(within && positive && identical && chain.len() == RETAINED_DRAWS, checks.join(", "))
}

fn lse(kind: ModelKind) -> RollingConfig {
    RollingConfig { kind, omega: OmegaSetting::Fixed(1.0), ..RollingConfig::default() }
}

fn exact_recovery() -> Outcome {
    let (a, b, x0) = (-0.01, 2.0, 1.0);
    let gm11: Vec<f64> = std::iter::once(x0)
        .chain((1..40).map(|k| (1.0 - f64::exp(a)) * (x0 - b / a) * (-a * k as f64).exp()))
        .collect();
    let gm11_mse = run_rolling(&ObservationSeries::new(gm11).unwrap(), &lse(ModelKind::Gm11)).unwrap().mse;

    let (a, b, x0) = (-0.5, -0.01, 10.0);
    let x1 = |t: f64| a * x0 / (b * x0 + (a - b * x0) * (a * (t - 1.0)).exp());
    let verhulst: Vec<f64> = std::iter::once(x0).chain((2..=20).map(|t| x1(t as f64) - x1(t as f64 - 1.0))).collect();
    let gvm_mse = run_rolling(&ObservationSeries::new(verhulst).unwrap(), &lse(ModelKind::Gvm)).unwrap().mse;

    let constant = ObservationSeries::new(vec![60.0; 20]).unwrap();
    let mut worst_constant: f64 = 0.0;
    for kind in ModelKind::ALL {
        for estimator in [Estimator::Lse, Estimator::Bayes] {
            let cfg = RollingConfig { estimator, ..lse(kind) };
            worst_constant = worst_constant.max(run_rolling(&constant, &cfg).unwrap().mse);
        }
    }
    outcome(
        gm11_mse < RECOVERY_MSE && gvm_mse < RECOVERY_MSE && worst_constant < CONSTANT_MSE,
        format!(
            "GM11 a=-0.01 mse {gm11_mse:.2e}, Verhulst (a,b)=(-0.5,-0.01) mse {gvm_mse:.2e} (tol {RECOVERY_MSE:e}); \
             constant series worst mse {worst_constant:.2e} (tol {CONSTANT_MSE:e})"
        ),
    )
}

fn improvement_table() -> Outcome {
    // (model, LSE mse, BAYES mse, printed improvement) for both days.
    let days: [[(ModelKind, f64, f64, f64); 5]; 2] = [
        [
            (ModelKind::Gm11, 48.50, 48.72, -0.46),
            (ModelKind::Gvm, 23.76, 22.69, 4.48),
            (ModelKind::GmSin, 46.37, 45.75, 4.56),
            (ModelKind::GmCos, 29.79, 24.48, 17.82),
            (ModelKind::GmSinCos, 46.37, 29.16, 37.12),
        ],
        [
            (ModelKind::Gm11, 92.59, 90.90, 1.82),
            (ModelKind::Gvm, 36.62, 35.79, 2.25),
            (ModelKind::GmSin, 89.84, 86.61, 3.59),
            (ModelKind::GmCos, 58.97, 49.39, 16.25),
            (ModelKind::GmSinCos, 100.41, 55.15, 45.07),
        ],
    ];
    let mut off = Vec::new();
    let mut worst: f64 = 0.0;
    for (day, rows) in days.iter().enumerate() {
        let entries = rows
            .iter()
            .flat_map(|&(model, l, b, _)| {
                [Estimator::Lse, Estimator::Bayes].map(|estimator| MetricEntry {
                    model,
                    estimator,
                    mse: if estimator == Estimator::Lse { l } else { b },
                    improvement_pct: None,
                    warnings: vec![],
                })
            })
            .collect();
        let report = MetricReport::from_entries(entries);
        for &(model, _, _, printed) in rows {
            let got = report.improvement(model).unwrap();
            let d = (got - printed).abs();
            worst = worst.max(d);
            if d > IMPROVEMENT_TOL {
                off.push(format!("day {} {model}: computed {got:.4} vs printed {printed}", day + 1));
            }
        }
    }
    let detail = if off.is_empty() {
        format!("10 entries, worst deviation {worst:.4} (tol {IMPROVEMENT_TOL})")
    } else {
        format!("{} of 10 entries outside {IMPROVEMENT_TOL}: {}", off.len(), off.join("; "))
    };
    outcome(off.is_empty(), detail)
}

fn synthetic_seasonal() -> Outcome {
    let start = Instant::now();
    let wins: Vec<(f64, f64)> = map_range(SYNTHETIC_REPLICATIONS, Execution::Parallel, |rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + rep as u64);
        let values: Vec<f64> = (1..=300)
            .map(|k| 55.0 + 8.0 * (0.8 * k as f64).sin() + 2.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let series = ObservationSeries::new(values).unwrap();
        let wrong =
            RollingConfig { kind: ModelKind::GmSin, omega: OmegaSetting::Fixed(4.30), ..RollingConfig::default() };
        let bayes = RollingConfig {
            estimator: Estimator::Bayes,
            bayes: BayesConfig { seed: rep as u64, ..BayesConfig::default() },
            ..wrong.clone()
        };
        (run_rolling(&series, &wrong).unwrap().mse, run_rolling(&series, &bayes).unwrap().mse)
    });
    let elapsed = start.elapsed();
    let won = wins.iter().filter(|(l, b)| b < l).count();
    let pairs: Vec<String> = wins.iter().map(|(l, b)| format!("{l:.2}/{b:.2}")).collect();
    outcome(
        won >= SYNTHETIC_WINS && elapsed < SYNTHETIC_BUDGET,
        format!(
            "BAYES beat LSE(w=4.30) in {won} of {SYNTHETIC_REPLICATIONS} (need {SYNTHETIC_WINS}); lse/bayes mse {}",
            pairs.join(" ")
        ),
    )
}

fn causality_and_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base: Vec<f64> = (1..=40).map(|k| 55.0 + 6.0 * (0.7 * k as f64).sin() + rng.random_range(-2.0..2.0)).collect();
    let small_bayes = BayesConfig { samples: 600, burn_in: 100, seed: 3, ..BayesConfig::default() };
    let mut configs: Vec<RollingConfig> = ModelKind::ALL.iter().map(|&k| lse(k)).collect();
    configs.extend(ModelKind::ALL.iter().map(|&kind| RollingConfig {
        kind,
        estimator: Estimator::Bayes,
        bayes: small_bayes.clone(),
        ..RollingConfig::default()
    }));
    let mut violations = 0;
    let mut compared = 0;
    for cut in [6, 15, 27, 38] {
        let mut mutated = base.clone();
        for v in mutated.iter_mut().skip(cut) {
            *v = rng.random_range(20.0..90.0);
        }
        for cfg in &configs {
            let a = run_rolling(&ObservationSeries::new(base.clone()).unwrap(), cfg).unwrap();
            let b = run_rolling(&ObservationSeries::new(mutated.clone()).unwrap(), cfg).unwrap();
            for (p, q) in a.predictions.iter().zip(&b.predictions).filter(|(p, _)| p.k <= cut + 1) {
                compared += 1;
                if p.predicted.to_bits() != q.predicted.to_bits() {
                    violations += 1;
                }
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("speeds.csv");
    let mut text = String::from("t,speed\n");
    for (k, v) in base.iter().enumerate() {
        text.push_str(&format!("{},{v}\n", k + 1));
    }
    std::fs::write(&input, text).unwrap();
    let manifest = RunManifest {
        input,
        time_col: Some("t".into()),
        samples: 600,
        burn_in: 100,
        seed: 5,
        out_dir: dir.path().join("out"),
        ..RunManifest::default()
    };
    let snapshot = || {
        let bundle = run(&manifest).unwrap();
        bundle.written.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let first = snapshot();
    let second = snapshot();
    let identical = first == second && first.len() == 6;
    outcome(
        violations == 0 && identical,
        format!(
            "{compared} causal predictions compared across 10 configs, {violations} changed; \
             two full runs byte-identical over {} files: {identical}",
            first.len()
        ),
    )
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use greycast::io::{run, RunManifest};
use greycast::lse::OmegaGrid;
use greycast::rolling::{Estimator, PriorMode};
use greycast::{Execution, ModelKind, TimeIndex};

/// Rolling one-step-ahead grey-model forecasts with least-squares and Bayesian estimation.
///
/// Flags override the corresponding manifest fields.
#[derive(Debug, Parser)]
#[command(name = "greycast", version)]
struct Cli {
    /// JSON run manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Input CSV with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    speed_col: Option<String>,
    /// Timestamp column echoed into outputs.
    #[arg(long)]
    time_col: Option<String>,
    /// Comma-separated: GM11,GVM,GM_SIN,GM_COS,GM_SINCOS.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    /// Comma-separated: LSE,BAYES.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<Estimator>>,
    /// Observations per fit [default: 4].
    #[arg(long)]
    window: Option<usize>,
    /// Total MCMC sweeps per window, burn-in included [default: 5000].
    #[arg(long)]
    samples: Option<usize>,
    /// [default: 500]
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed ω for least squares.
    #[arg(long, conflicts_with = "omega_grid")]
    omega: Option<f64>,
    /// ω search grid for least squares, lo:hi:step [default: 0.01:12:0.01].
    #[arg(long)]
    omega_grid: Option<OmegaGrid>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Trigonometric time origin of each window.
    #[arg(long, value_enum)]
    time_index: Option<TimeArg>,
    /// Seed each window's prior with the previous posterior.
    #[arg(long)]
    carry_forward: bool,
    /// Run configurations one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TimeArg {
    Local,
    Global,
}

impl Cli {
    fn manifest(self) -> Result<RunManifest> {
        let mut m = match &self.manifest {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunManifest::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunManifest::default(),
        };
        if let Some(v) = self.input {
            m.input = v;
        }
        if let Some(v) = self.speed_col {
            m.speed_col = v;
        }
        if let Some(v) = self.time_col {
            m.time_col = Some(v);
        }
        if let Some(v) = self.models {
            m.models = v;
        }
        if let Some(v) = self.estimators {
            m.estimators = v;
        }
        if let Some(v) = self.window {
            m.window = v;
        }
        if let Some(v) = self.samples {
            m.samples = v;
        }
        if let Some(v) = self.burn_in {
            m.burn_in = v;
        }
        if let Some(v) = self.seed {
            m.seed = v;
        }
        if let Some(v) = self.omega {
            m.omega = Some(v);
            m.omega_grid = None;
        }
        if let Some(v) = self.omega_grid {
            m.omega_grid = Some(v);
            m.omega = None;
        }
        if let Some(v) = self.out_dir {
            m.out_dir = v;
        }
        if let Some(v) = self.time_index {
            m.time_index = match v {
                TimeArg::Local => TimeIndex::Local,
                TimeArg::Global => TimeIndex::Global,
            };
        }
        if self.carry_forward {
            m.prior_mode = PriorMode::CarryForward;
        }
        if self.sequential {
            m.execution = Execution::Sequential;
        }
        Ok(m)
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let manifest = cli.manifest()?;
    if manifest.input.as_os_str().is_empty() {
        anyhow::bail!("no input given (use --input or a manifest)");
    }
    let bundle = run(&manifest)?;
    for r in &bundle.results {
        for w in r.warning_digest() {
            eprintln!("warning: {} {}: {w}", r.kind, r.estimator);
        }
    }
    for e in &bundle.metrics.entries {
        match e.improvement_pct {
            Some(p) => println!("{:<10} {:<6} mse {:.6}  improvement {p:.2}%", e.model, e.estimator, e.mse),
            None => println!("{:<10} {:<6} mse {:.6}", e.model, e.estimator, e.mse),
        }
    }
    eprintln!("wrote {} files to {} in {:.2?}", bundle.written.len(), manifest.out_dir.display(), bundle.wall_time);
    Ok(())
}

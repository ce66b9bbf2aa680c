use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{GreyError, Result};
use crate::io::{ingest_csv, RunManifest};
use crate::par::map_ordered;
use crate::rolling::{compute_metrics, run_rolling, MetricReport, RollingRunResult};

pub const OUTPUT_FILES: [&str; 6] = [
    "predictions.csv",
    "params_trace.csv",
    "omega_trace.csv",
    "posterior_summary.csv",
    "metrics.json",
    "manifest_echo.json",
];

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub manifest: RunManifest,
    pub series_len: usize,
    pub results: Vec<RollingRunResult>,
    pub metrics: MetricReport,
    /// Reported to the caller only; kept out of the files so reruns are byte-identical.
    pub wall_time: Duration,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ManifestEcho<'a> {
    version: &'a str,
    seed: u64,
    series_len: usize,
    manifest: &'a RunManifest,
}

/// Validates, computes every configured run, then writes all outputs.
pub fn run(manifest: &RunManifest) -> Result<ReportBundle> {
    manifest.validate()?;
    let series = ingest_csv(&manifest.input, &manifest.mapping())?;
    if series.len() <= manifest.window {
        return Err(GreyError::Domain(format!(
            "series of length {} is too short for window {}",
            series.len(),
            manifest.window
        )));
    }
    let start = Instant::now();
    let configs = manifest.configs();
    let results = map_ordered(&configs, manifest.execution, |c| run_rolling(&series, c))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let metrics = compute_metrics(&results)?;
    let wall_time = start.elapsed();

    let mut bundle = ReportBundle {
        manifest: manifest.clone(),
        series_len: series.len(),
        results,
        metrics,
        wall_time,
        written: Vec::new(),
    };
    bundle.written = write_report(&bundle, &manifest.out_dir)?;
    Ok(bundle)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_report(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let path = |name: &str| dir.join(name);
    let has_bayes = bundle.results.iter().any(|r| !r.posteriors.is_empty());

    let mut w = csv::Writer::from_path(path("predictions.csv"))?;
    w.write_record(["model", "estimator", "k", "timestamp", "observed", "predicted", "fallback"])?;
    for r in &bundle.results {
        for p in &r.predictions {
            w.write_record([
                r.kind.tag().to_string(),
                r.estimator.tag().to_string(),
                p.k.to_string(),
                opt(p.timestamp),
                num(p.observed),
                num(p.predicted),
                p.fallback.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(path("params_trace.csv"))?;
    w.write_record(["model", "estimator", "k", "parameter", "value"])?;
    for r in &bundle.results {
        for step in &r.parameters {
            let Some(params) = &step.params else { continue };
            let roles = r.kind.roles();
            let named = roles.iter().map(|role| role.label()).zip(params.coefficients());
            let extra = [("omega", params.omega), ("tau", params.tau)];
            let rows = named.chain(extra.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))));
            for (name, value) in rows {
                w.write_record([r.kind.tag(), r.estimator.tag(), &step.k.to_string(), name, &num(value)])?;
            }
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(path("omega_trace.csv"))?;
    w.write_record(["model", "estimator", "k", "omega"])?;
    for r in bundle.results.iter().filter(|r| r.kind.is_trigonometric()) {
        for step in &r.parameters {
            let omega = step.params.as_ref().and_then(|p| p.omega);
            w.write_record([r.kind.tag(), r.estimator.tag(), &step.k.to_string(), &opt(omega)])?;
        }
    }
    w.flush()?;

    let mut written: Vec<PathBuf> = OUTPUT_FILES[..3].iter().map(|n| path(n)).collect();
    let summary_path = path("posterior_summary.csv");
    if has_bayes {
        let mut w = csv::Writer::from_path(&summary_path)?;
        w.write_record([
            "model",
            "estimator",
            "k",
            "node",
            "mean",
            "sd",
            "q2_5",
            "q25",
            "q50",
            "q75",
            "q97_5",
            "samples",
        ])?;
        for r in &bundle.results {
            for (k, post) in &r.posteriors {
                for n in post.rows() {
                    w.write_record([
                        r.kind.tag().to_string(),
                        r.estimator.tag().to_string(),
                        k.to_string(),
                        n.node.clone(),
                        num(n.mean),
                        num(n.sd),
                        num(n.q2_5),
                        num(n.q25),
                        num(n.q50),
                        num(n.q75),
                        num(n.q97_5),
                        n.samples.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        written.push(summary_path);
    } else if summary_path.exists() {
        std::fs::remove_file(&summary_path)?;
    }

    std::fs::write(path("metrics.json"), serde_json::to_string_pretty(&bundle.metrics)? + "\n")?;
    written.push(path("metrics.json"));

    let echo = ManifestEcho {
        version: env!("CARGO_PKG_VERSION"),
        seed: bundle.manifest.seed,
        series_len: bundle.series_len,
        manifest: &bundle.manifest,
    };
    std::fs::write(path("manifest_echo.json"), serde_json::to_string_pretty(&echo)? + "\n")?;
    written.push(path("manifest_echo.json"));
    Ok(written)
}

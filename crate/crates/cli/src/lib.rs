//! Batch driver: strict JSON configs in, CSV tables and a JSON summary out.

pub mod config;
pub mod experiments;
pub mod output;
pub mod registry;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::Value;

use crate::config::LoadedConfig;
use crate::output::{write_artifacts, Summary};

pub use registry::list_experiments;

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status for usage and configuration errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when at least one registered check failed.
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Name of the thread-count fallback variable.
pub const THREADS_ENV: &str = "SCHRO_MAXLAB_THREADS";

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Loads, validates and runs one config, writing artifacts to
/// `out` or else the config's `output` or else `./out`.
pub fn run(path: &Path, out: Option<&Path>, threads: Option<usize>) -> Result<Outcome> {
    let loaded = LoadedConfig::from_path(path)?;
    run_loaded(&loaded, out, threads)
}

pub fn run_loaded(loaded: &LoadedConfig, out: Option<&Path>, threads: Option<usize>) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        anyhow::ensure!(n >= 1, "--threads must be >= 1");
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("cannot start the thread pool")?;
    let config = &loaded.config;
    let result = pool.install(|| experiments::execute(config))?;

    let mut provenance = result.provenance.clone();
    provenance.insert("config".into(), serde_json::from_str(&loaded.canonical)?);
    provenance.insert("crate_version".into(), env!("CARGO_PKG_VERSION").into());
    provenance.insert("threads".into(), pool.current_num_threads().into());
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    provenance.insert("generated_unix".into(), now.into());

    let summary = Summary {
        experiment: config.experiment.name().to_string(),
        inputs_hash: loaded.inputs_hash.clone(),
        passed: result.passed(),
        metrics: Value::Object(result.metrics.clone()),
        checks: result.checks.clone(),
        provenance: Value::Object(provenance),
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = write_artifacts(&dir, config.experiment.name(), &result.tables, &summary)?;
    Ok(Outcome { summary, written })
}

/// `--threads` wins; otherwise a positive integer in [`THREADS_ENV`].
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(text) => match text.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => anyhow::bail!("{THREADS_ENV} must be a positive integer, got {text:?}"),
        },
    }
}

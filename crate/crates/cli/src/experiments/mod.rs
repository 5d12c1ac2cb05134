//! One function per registered experiment. Each validates its inputs fully
//! before computing and returns tables, metrics, checks and provenance.

mod counterexample;
mod maximal;
mod sets;
mod spectral;

use anyhow::Result;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::output::{Check, Table};
use crate::registry::Experiment;

#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub tables: Vec<Table>,
    pub metrics: Map<String, Value>,
    pub checks: Vec<Check>,
    pub provenance: Map<String, Value>,
}

impl ExperimentResult {
    pub fn metric(&mut self, key: &str, value: impl serde::Serialize) {
        self.metrics.insert(
            key.to_string(),
            serde_json::to_value(value).expect("metrics serialize"),
        );
    }

    pub fn provenance(&mut self, key: &str, value: impl serde::Serialize) {
        self.provenance.insert(
            key.to_string(),
            serde_json::to_value(value).expect("provenance serializes"),
        );
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<ExperimentResult> {
    match config.experiment {
        Experiment::Propagate => spectral::propagate(config),
        Experiment::Multiplier => spectral::multiplier(config),
        Experiment::Covernum => sets::covernum(config),
        Experiment::Suffsum => sets::suffsum(config),
        Experiment::Exponents => sets::exponents(config),
        Experiment::Maximal => maximal::maximal(config),
        Experiment::Theorem3 => maximal::theorem3(config),
        Experiment::Lemma3 => maximal::lemma3(config),
        Experiment::Counterexample => counterexample::counterexample(config),
    }
}

/// `|a − b| / |b|`, or `|a|` when `b = 0`.
pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

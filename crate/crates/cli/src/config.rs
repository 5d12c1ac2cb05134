//! Strict JSON run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use schro_maxlab::{ExponentParams, FrequencyGrid, SetDescriptor};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::registry::Experiment;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Option<ExponentParams>,
    #[serde(default)]
    pub set: Option<SetDescriptor>,
    #[serde(default)]
    pub grid: Option<FrequencyGrid>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub options: serde_json::Value,
}

/// A parsed config together with its canonical form.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// Keys sorted, no whitespace; the input to the hash.
    pub canonical: String,
    pub inputs_hash: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let config: ExperimentConfig = serde_path_to_error::deserialize(value.clone())
            .map_err(|e| anyhow!("config field `{}`: {}", e.path(), e.inner()))?;
        let canonical = serde_json::to_string(&value)?;
        let inputs_hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        Ok(Self {
            config,
            canonical,
            inputs_hash,
        })
    }
}

impl ExperimentConfig {
    pub fn require_params(&self) -> Result<ExponentParams> {
        self.params.ok_or_else(|| self.missing("params"))
    }

    pub fn require_grid(&self) -> Result<FrequencyGrid> {
        self.grid.ok_or_else(|| self.missing("grid"))
    }

    pub fn require_set(&self) -> Result<&SetDescriptor> {
        self.set.as_ref().ok_or_else(|| self.missing("set"))
    }

    pub fn trials_or(&self, default: usize) -> Result<usize> {
        match self.trials.unwrap_or(default) {
            0 => bail!("config field `trials` must be >= 1"),
            n => Ok(n),
        }
    }

    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Experiment-specific options; `null` or absent means all defaults.
    pub fn options<T: DeserializeOwned + Default>(&self) -> Result<T> {
        if self.options.is_null() {
            return Ok(T::default());
        }
        serde_path_to_error::deserialize(self.options.clone())
            .map_err(|e| anyhow!("config field `options.{}`: {}", e.path(), e.inner()))
    }

    fn missing(&self, field: &str) -> anyhow::Error {
        anyhow!(
            "config field `{field}` is required for experiment `{}`",
            self.experiment.name()
        )
    }
}

/// Named check thresholds with per-run overrides.
#[derive(Debug, Clone)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
}

impl Tolerances {
    /// Rejects override keys that the experiment does not define.
    pub fn resolve(defaults: &[(&str, f64)], overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut values: BTreeMap<String, f64> =
            defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (key, value) in overrides {
            if !values.contains_key(key) {
                let known: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
                bail!("config field `tolerances.{key}` is unknown; expected one of {known:?}");
            }
            if !value.is_finite() {
                bail!("config field `tolerances.{key}` must be finite");
            }
            values.insert(key.clone(), *value);
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> f64 {
        self.values[key]
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_top_level_key_is_named() {
        let err = LoadedConfig::from_str(r#"{"experiment": "list", "bogus": 1}"#).unwrap_err();
        assert!(format!("{err:#}").contains("experiment"));
        let err = LoadedConfig::from_str(r#"{"experiment": "exponents", "bogus": 1}"#).unwrap_err();
        assert!(format!("{err:#}").contains("bogus"));
    }

    #[test]
    fn hash_ignores_formatting_and_key_order() {
        let a = LoadedConfig::from_str(r#"{"experiment":"exponents","seed":3}"#).unwrap();
        let b = LoadedConfig::from_str("{\n  \"seed\": 3,\n  \"experiment\": \"exponents\"\n}").unwrap();
        assert_eq!(a.inputs_hash, b.inputs_hash);
        let c = LoadedConfig::from_str(r#"{"experiment":"exponents","seed":4}"#).unwrap();
        assert_ne!(a.inputs_hash, c.inputs_hash);
    }

    #[test]
    fn nested_descriptors_are_strict() {
        let bad_set = r#"{"experiment":"covernum","set":{"kind":"cantor","params":{"lambda":0.3,"x":1},"level":3}}"#;
        assert!(LoadedConfig::from_str(bad_set).is_err());
        let bad_params = r#"{"experiment":"exponents","params":{"a":2,"s":0.5,"n":1,"k":0}}"#;
        assert!(LoadedConfig::from_str(bad_params).is_err());
        let bad_value = r#"{"experiment":"exponents","params":{"a":-2,"s":0.5,"n":1}}"#;
        assert!(LoadedConfig::from_str(bad_value).is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let mut o = BTreeMap::new();
        o.insert("unitarity".to_string(), 1e-9);
        let t = Tolerances::resolve(&[("unitarity", 1e-12)], &o).unwrap();
        assert_eq!(t.get("unitarity"), 1e-9);
        o.insert("nope".to_string(), 1.0);
        let err = Tolerances::resolve(&[("unitarity", 1e-12)], &o).unwrap_err();
        assert!(err.to_string().contains("tolerances.nope"));
    }
}

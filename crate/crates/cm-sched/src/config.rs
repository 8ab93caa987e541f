//! JSON run configs, `--set` dot-path overrides, and the run manifest
//! that makes every invocation exactly reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::BucketSpec;
use crate::error::{Error, Result};
use crate::schedule::{InjectionSpec, KarrasParams, ScheduleSpec};
use crate::toy::ToyDataset;

/// Config for the `schedule` subcommand: emit one or more mini-batch
/// assignments from a single discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRunConfig {
    pub karras: KarrasParams,
    pub n_k: usize,
    pub schedule: ScheduleSpec,
    pub batch_size: usize,
    /// How many consecutive batches to emit (seeded per step).
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub injection: Option<InjectionSpec>,
    #[serde(default)]
    pub buckets: BucketSpec,
}

fn default_steps() -> usize {
    1
}

/// Config for the `analyze` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub karras: KarrasParams,
    pub n_k: usize,
    pub samples_per_config: usize,
    #[serde(default)]
    pub buckets: BucketSpec,
    pub configs: Vec<NamedSchedule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSchedule {
    pub id: String,
    pub schedule: ScheduleSpec,
}

/// Config for the `sample` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Checkpoint stem (or one of its `.json`/`.bin` files).
    pub checkpoint: PathBuf,
    pub count: usize,
    pub steps: usize,
}

/// Config for the `eval` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Samples CSV (`x,y`) to score.
    pub samples: PathBuf,
    pub dataset: ToyDataset,
    #[serde(default = "default_reference_samples")]
    pub reference_samples: usize,
    #[serde(default = "default_projections")]
    pub projections: usize,
}

fn default_reference_samples() -> usize {
    4096
}

fn default_projections() -> usize {
    128
}

/// Read a config file into a JSON tree.
pub fn load_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        field: "config".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        field: "config".into(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Apply one `--set key.path=value` override onto the JSON tree before
/// validation. The value is parsed as JSON when possible, else kept as a
/// string; intermediate objects are created as needed.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| Error::Config {
        field: "--set".into(),
        message: format!("expected KEY=VALUE, got `{assignment}`"),
    })?;
    if path.is_empty() {
        return Err(Error::config("--set", "override key must not be empty"));
    }
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));

    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if !node.is_object() {
            return Err(Error::Config {
                field: path.to_string(),
                message: format!("`{}` is not an object", segments[..i].join(".")),
            });
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == segments.len() {
            map.insert(segment.to_string(), parsed);
            return Ok(());
        }
        node = map
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("segments is never empty");
}

/// Deserialize a (possibly overridden) JSON tree into a typed config.
pub fn resolve<T: DeserializeOwned>(value: &Value) -> Result<T> {
    serde_json::from_value(value.clone()).map_err(|e| Error::Config {
        field: "config".into(),
        message: e.to_string(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hash of the resolved config (serde_json orders object keys, so the
/// serialization is canonical).
pub fn config_hash(value: &Value) -> String {
    sha256_hex(value.to_string().as_bytes())
}

/// Written next to every subcommand's artifacts; rerunning with the
/// recorded config and seed reproduces the artifact hashes byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub seed: u64,
    pub config: Value,
    pub config_hash: String,
    /// Artifact file name -> sha256 of its bytes.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64, config: Value) -> Self {
        let config_hash = config_hash(&config);
        RunManifest {
            subcommand: subcommand.to_string(),
            seed,
            config,
            config_hash,
            artifacts: BTreeMap::new(),
        }
    }

    /// Write an artifact into `dir` and record its hash.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(dir.join(name), bytes)?;
        self.artifacts.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn override_replaces_nested_field() {
        let mut v = json!({"schedule": {"kind": "polynomial", "curve": 4.0}});
        apply_override(&mut v, "schedule.curve=2.5").unwrap();
        assert_eq!(v["schedule"]["curve"], json!(2.5));
    }

    #[test]
    fn override_creates_missing_objects() {
        let mut v = json!({});
        apply_override(&mut v, "injection.ratio=0.04").unwrap();
        assert_eq!(v["injection"]["ratio"], json!(0.04));
    }

    #[test]
    fn override_keeps_unparseable_values_as_strings() {
        let mut v = json!({});
        apply_override(&mut v, "dataset=two_moons").unwrap();
        assert_eq!(v["dataset"], json!("two_moons"));
    }

    #[test]
    fn override_rejects_missing_equals() {
        let mut v = json!({});
        assert!(apply_override(&mut v, "no_equals_here").is_err());
    }

    #[test]
    fn resolve_names_offending_field() {
        let v = json!({"karras": {"sigma_min": 0.002}});
        let err = resolve::<ScheduleRunConfig>(&v).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sigma_max") || msg.contains("missing field"), "{msg}");
    }

    #[test]
    fn config_hash_is_order_independent() {
        let a = json!({"b": 1, "a": 2});
        let b = json!({"a": 2, "b": 1});
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn manifest_records_artifact_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("schedule", 0, json!({"x": 1}));
        m.write_artifact(dir.path(), "a.csv", b"step,k\n0,0\n").unwrap();
        m.save(dir.path()).unwrap();
        let loaded: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(loaded.artifacts["a.csv"], sha256_hex(b"step,k\n0,0\n"));
    }
}

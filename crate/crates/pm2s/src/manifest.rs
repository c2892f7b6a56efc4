//! Run manifests: what a command read, with which configuration, and the
//! summed counters of every report it produced.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config: Value,
    /// SHA-256 of the compact JSON form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub counters: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, config: &impl Serialize, seed: u64) -> Self {
        let config = serde_json::to_value(config).expect("configuration serializes");
        let config_hash = hex::encode(Sha256::digest(config.to_string().as_bytes()));
        Self { command: command.into(), inputs, config, config_hash, seed, counters: BTreeMap::new() }
    }

    /// Adds every integer field of `report` to the counter `prefix.field`;
    /// true booleans count as 1.
    pub fn add(&mut self, prefix: &str, report: &impl Serialize) {
        if let Ok(Value::Object(map)) = serde_json::to_value(report) {
            for (k, v) in map {
                let n = match v {
                    Value::Number(n) => n.as_u64(),
                    Value::Bool(b) => Some(b as u64),
                    _ => None,
                };
                if let Some(n) = n {
                    *self.counters.entry(format!("{prefix}.{k}")).or_default() += n;
                }
            }
        }
    }

    pub fn count(&mut self, name: &str, n: u64) {
        *self.counters.entry(name.into()).or_default() += n;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

//! Run manifests written next to generated files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// What was run, on which inputs, and what it wrote. Timings are the only
/// field that differs between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of the command's settings and the
    /// digests of its input files.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timings: Vec<StageTiming>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &serde_json::Value, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_vec(config).expect("serializable config");
        Self {
            command: command.into(),
            config_digest: sha256_hex(&canonical),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn time(&mut self, stage: &str, seconds: f64) {
        self.timings.push(StageTiming { stage: stage.into(), seconds });
    }

    pub fn record(&mut self, path: &str, bytes: &[u8]) {
        self.outputs.push(OutputRecord { path: path.into(), sha256: sha256_hex(bytes) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn digest_depends_only_on_config() {
        let cfg = serde_json::json!({"seed": 1, "metric": "h2"});
        let a = RunManifest::new("gains", &cfg, Some(1));
        let b = RunManifest::new("gains", &cfg, Some(1));
        assert_eq!(a.config_digest, b.config_digest);
        assert_ne!(a.config_digest, RunManifest::new("gains", &serde_json::json!({"seed": 2}), Some(2)).config_digest);
    }
}

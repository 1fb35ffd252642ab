use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use nullsteer::Scenario;

/// SHA-256 of the compact JSON encoding of the scenario.
pub fn scenario_digest(s: &Scenario) -> String {
    let canonical = serde_json::to_string(s).expect("scenario serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub scenario_digest: Option<String>,
    pub seed: u64,
    pub tool_version: &'static str,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub message: Option<String>,
}

/// Collects output files while a command runs.
pub struct ManifestBuilder {
    started: Instant,
    pub out_dir: PathBuf,
    pub command_line: Vec<String>,
    pub seed: u64,
    pub digest: Option<String>,
    pub outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path, seed: u64) -> Self {
        ManifestBuilder {
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            command_line: std::env::args().collect(),
            seed,
            digest: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        std::fs::write(self.out_dir.join(name), bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, status: &str, message: Option<String>) -> std::io::Result<()> {
        let manifest = RunManifest {
            command_line: self.command_line,
            scenario_digest: self.digest,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            status: status.to_string(),
            message,
        };
        std::fs::create_dir_all(&self.out_dir)?;
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.out_dir.join("manifest.json"), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_content_addressed() {
        let a = nullsteer::default_techtile_scenario();
        let mut b = a.clone();
        assert_eq!(scenario_digest(&a), scenario_digest(&b));
        b.bd_position[0] += 0.01;
        assert_ne!(scenario_digest(&a), scenario_digest(&b));
        assert_eq!(scenario_digest(&a).len(), 64);
    }
}

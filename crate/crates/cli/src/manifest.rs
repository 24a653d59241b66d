use std::path::{Path, PathBuf};
use std::time::Instant;

use kgg::simulator::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Everything needed to rerun a command that wrote files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub args: Vec<String>,
    pub config: Option<SimConfig>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

pub struct ManifestBuilder {
    started: Instant,
    config: Option<SimConfig>,
    seed: Option<u64>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn start() -> Self {
        ManifestBuilder {
            started: Instant::now(),
            config: None,
            seed: None,
            outputs: Vec::new(),
        }
    }

    pub fn config(&mut self, config: &SimConfig) {
        self.seed = Some(config.seed);
        self.config = Some(config.clone());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `manifest.json` into `dir` and returns its path.
    pub fn finish(self, dir: &Path) -> CliResult<PathBuf> {
        let manifest = RunManifest {
            args: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            outputs: self.outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(kgg::Error::from)?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

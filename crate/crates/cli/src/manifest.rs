//! Run manifests written beside every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    /// Everything that determines the outputs: parameters, grids, seeds and
    /// what the tuning picked.
    pub config: Value,
    /// The only field that varies between identical reruns.
    pub wall_clock_seconds: f64,
}

pub struct ManifestBuilder {
    command: String,
    inputs: Vec<InputDigest>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder {
            command: command.into(),
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Reads `path`, records its digest, and hands back the contents.
    pub fn input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: gnc_lasso::io::sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn finish(self, outputs: &[&Path], config: Value) -> RunManifest {
        RunManifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            inputs: self.inputs,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// `out.json` -> `out.json.manifest.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

pub fn write(manifest: &RunManifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

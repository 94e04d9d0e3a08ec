//! JSON run manifests written next to each primary artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PipelineError, Result};
use crate::formats::{read_artifact, sha256_file, sha256_hex, write_atomic};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl ArtifactRef {
    pub fn hash(role: &str, path: &Path) -> Result<Self> {
        Ok(Self { role: role.to_string(), path: path.display().to_string(), sha256: sha256_file(path)? })
    }
}

fn producer_of(role: &str) -> Option<&'static str> {
    match role {
        "cells" => Some("gen"),
        "rescale" => Some("features"),
        "labels" | "kept" => Some("label"),
        "model" => Some("train"),
        "parity" => Some("eval"),
        "curves" => Some("al"),
        r if r.starts_with("pca") => Some("pca"),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config: Value,
    pub inputs: Vec<ArtifactRef>,
    pub outputs: Vec<ArtifactRef>,
    /// Wall-clock seconds per stage; the only non-reproducible field.
    pub timings: BTreeMap<String, f64>,
}

/// `<artifact>.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

/// SHA-256 of the canonical JSON form of a resolved configuration.
pub fn config_hash(config: &Value) -> String {
    sha256_hex(serde_json::to_string(config).expect("config serializes").as_bytes())
}

/// Collects inputs, outputs and stage timings for one subcommand run.
pub struct RunRecorder {
    command: String,
    seed: Option<u64>,
    config: Value,
    inputs: Vec<ArtifactRef>,
    outputs: Vec<ArtifactRef>,
    timings: BTreeMap<String, f64>,
}

impl RunRecorder {
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let sha256 = match producer_of(role) {
            Some(producer) => sha256_hex(&read_artifact(path, producer)?),
            None => sha256_file(path)?,
        };
        self.inputs.push(ArtifactRef { role: role.to_string(), path: path.display().to_string(), sha256 });
        Ok(())
    }

    pub fn output(&mut self, role: &str, path: &Path) -> Result<()> {
        self.outputs.push(ArtifactRef::hash(role, path)?);
        Ok(())
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
        out
    }

    pub fn finish(self) -> Manifest {
        Manifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config_hash: config_hash(&self.config),
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            timings: self.timings,
        }
    }

    /// Writes the manifest next to `primary` and returns its path.
    pub fn write(self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        let mut json = serde_json::to_vec_pretty(&self.finish()).expect("manifest serializes");
        json.push(b'\n');
        write_atomic(&path, &json)?;
        Ok(path)
    }
}

pub fn read_manifest(artifact: &Path, producer: &str) -> Result<Manifest> {
    let path = manifest_path(artifact);
    let bytes = read_artifact(&path, producer)?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::format(&path, format!("line {}: {e}", e.line())))
}

/// Checks that `path` still hashes to what the manifest recorded for `role`.
pub fn verify_input(manifest: &Manifest, role: &str, path: &Path) -> Result<()> {
    let recorded = manifest
        .inputs
        .iter()
        .find(|a| a.role == role)
        .ok_or_else(|| PipelineError::Dependency(format!("manifest of `{}` records no '{role}' input", manifest.command)))?;
    let actual = sha256_file(path)?;
    if actual != recorded.sha256 {
        return Err(PipelineError::Dependency(format!(
            "'{}' does not match the {role} artifact the model was trained on ({}); rerun `metamat {}`",
            path.display(),
            recorded.path,
            manifest.command
        )));
    }
    Ok(())
}

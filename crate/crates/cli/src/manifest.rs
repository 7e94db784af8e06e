//! Run manifests: what was run, on which inputs, and what it produced.

use crate::args::Command;
use drcsched::dataio::write_atomic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> std::io::Result<FileDigest> {
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Command line options as parsed.
    pub command: Command,
    /// Fully resolved configuration the command ran with.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    /// Deterministic outputs, relative to the manifest's directory.
    pub artifacts: Vec<FileDigest>,
    /// Outputs holding wall-clock measurements; not reproducible.
    #[serde(default)]
    pub timing_files: Vec<PathBuf>,
    /// Wall-clock seconds per phase.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

/// Collects the pieces of a manifest while a command runs.
pub struct ManifestBuilder {
    root: PathBuf,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(root: &Path, command: &Command, config: serde_json::Value) -> Self {
        Self {
            root: root.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.clone(),
                config,
                seeds: Vec::new(),
                inputs: Vec::new(),
                artifacts: Vec::new(),
                timing_files: Vec::new(),
                timings: BTreeMap::new(),
            },
        }
    }

    pub fn seeds(&mut self, seeds: impl IntoIterator<Item = u64>) {
        self.manifest.seeds.extend(seeds);
    }

    pub fn input(&mut self, path: &Path) -> std::io::Result<()> {
        self.manifest.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    /// Writes a deterministic artifact under the run root and records its digest.
    pub fn artifact(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> drcsched::Result<()> {
        let rel = rel.as_ref();
        write_atomic(&self.root.join(rel), bytes)?;
        self.manifest.artifacts.push(FileDigest {
            path: rel.to_path_buf(),
            sha256: Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect(),
        });
        Ok(())
    }

    pub fn timing_file(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> drcsched::Result<()> {
        let rel = rel.as_ref();
        write_atomic(&self.root.join(rel), bytes)?;
        self.manifest.timing_files.push(rel.to_path_buf());
        Ok(())
    }

    pub fn timing(&mut self, phase: &str, seconds: f64) {
        *self.manifest.timings.entry(phase.into()).or_default() += seconds;
    }

    pub fn write(self, path: &Path) -> drcsched::Result<RunManifest> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        write_atomic(path, text.as_bytes())?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(path: &Path) -> drcsched::Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

//! Run manifest and the file writer that keeps it current.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentSpec;
use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Ok,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything run-specific (timestamps, thread count) lives here so that the
/// data files themselves are reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    pub spec: ExperimentSpec,
    pub code_version: String,
    pub threads: Option<usize>,
    pub started_unix_s: u64,
    pub wall_time_s: Option<f64>,
    pub files: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct ArtifactWriter {
    dir: PathBuf,
    manifest: Manifest,
    started: Instant,
}

impl ArtifactWriter {
    /// Creates the directory and writes a `running` manifest before anything
    /// else.
    pub fn create(dir: &Path, spec: &ExperimentSpec, threads: Option<usize>) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let w = ArtifactWriter {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                status: RunStatus::Running,
                spec: spec.clone(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                threads,
                started_unix_s,
                wall_time_s: None,
                files: Vec::new(),
                error: None,
            },
            started: Instant::now(),
        };
        w.flush()?;
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn flush(&self) -> Result<()> {
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_vec_pretty(&self.manifest).map_err(|e| HarnessError::Serialize(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e))
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        self.manifest.files.retain(|f| f.path != rel);
        self.manifest.files.push(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        self.flush()
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Serialize(e.to_string()))?;
        text.push(b'\n');
        self.write(rel, &text)
    }

    pub fn finish(mut self, outcome: std::result::Result<(), &HarnessError>) -> Result<Manifest> {
        self.manifest.wall_time_s = Some(self.started.elapsed().as_secs_f64());
        match outcome {
            Ok(()) => self.manifest.status = RunStatus::Ok,
            Err(e) => {
                self.manifest.status = RunStatus::Aborted;
                self.manifest.error = Some(e.to_string());
            }
        }
        self.flush()?;
        Ok(self.manifest)
    }
}

//! File emission. Every file is hashed as written and listed in the run
//! manifest; nothing machine- or time-dependent goes into any output, so a
//! rerun with the same configuration reproduces every byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rr_core::PhysicalConstants;

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub rows: usize,
}

/// A pass/fail contract evaluated on the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value <= limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub config_sha256: String,
    pub config: RunConfig,
    pub constants: PhysicalConstants,
    pub outputs: Vec<OutputFile>,
    pub checks: Vec<Check>,
    /// Command-specific summary.
    pub report: serde_json::Value,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files in one directory.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8], rows: usize) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputFile { name: name.into(), sha256: sha256_hex(bytes), rows });
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.write(name, &bytes, rows.len())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes, 1)
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(
        self,
        config: &RunConfig,
        preset: Option<&str>,
        checks: Vec<Check>,
        report: serde_json::Value,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            tool: "rr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: config.command.name().into(),
            preset: preset.map(str::to_string),
            seed: config.seed,
            config_sha256: sha256_hex(&serde_json::to_vec(config)?),
            config: config.clone(),
            constants: config.constants,
            outputs: self.files,
            passed: checks.iter().all(|c| c.passed),
            checks,
            report,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(manifest)
    }
}

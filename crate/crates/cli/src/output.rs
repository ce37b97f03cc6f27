//! Output files, hashes and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::run::ResolvedRun;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Writes outputs into one directory, refusing to overwrite unless forced. Each file goes
/// through a `.partial` sibling and is renamed into place once complete.
#[derive(Debug)]
pub struct OutputWriter {
    pub dir: PathBuf,
    pub force: bool,
    pub written: Vec<OutputFile>,
}

impl OutputWriter {
    pub fn new(dir: &Path, force: bool) -> CliResult<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            force,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Fails if any of `names` exists and `--force` was not given.
    pub fn ensure_free(&self, names: &[String]) -> CliResult<()> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.path(n);
            if p.exists() {
                return Err(CliError::Usage(format!(
                    "{} already exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let target = self.path(name);
        let partial = self.path(&format!("{name}.partial"));
        fs::write(&partial, bytes).with_context(|| format!("writing {}", partial.display()))?;
        fs::rename(&partial, &target)
            .with_context(|| format!("renaming to {}", target.display()))?;
        self.written.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(target)
    }

    /// Leaves `bytes` under `<name>.partial` for a failed run.
    pub fn write_partial(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let partial = self.path(&format!("{name}.partial"));
        fs::write(&partial, bytes).with_context(|| format!("writing {}", partial.display()))?;
        Ok(partial)
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub config: ResolvedRun,
    pub outputs: Vec<OutputFile>,
    pub runtime_s: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| auv_core::ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Config(auv_core::ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        })
    }
}

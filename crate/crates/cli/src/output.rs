use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use fractalconv::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

/// Record of one run, written as `manifest.json` next to the outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub tool_version: &'static str,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<FileDigest>,
}

/// Writes output files into one directory and remembers their digests.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        fs::write(self.path(name), bytes.as_ref())?;
        self.record(name, bytes.as_ref());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Registers a file that a library routine wrote to [`Outputs::path`].
    pub fn adopt(&mut self, name: &str) -> Result<()> {
        let bytes = fs::read(self.path(name))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.files.retain(|f| f.file != name);
        self.files.push(FileDigest { file: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
    }

    pub fn finish(
        mut self,
        command: &str,
        parameters: serde_json::Value,
        seed: u64,
        threads: usize,
        elapsed: Duration,
    ) -> Result<PathBuf> {
        self.files.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            threads,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: elapsed.as_secs_f64(),
            outputs: self.files,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to a command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub timestamp_unix_s: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Collects output files for one command and writes them with a manifest.
/// Without a directory nothing is written.
pub struct OutputDir {
    dir: Option<PathBuf>,
    command: &'static str,
    inputs: Vec<InputFile>,
    outputs: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: Option<PathBuf>, command: &'static str) -> Self {
        OutputDir {
            dir,
            command,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), Failure> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    /// Creates the directory up front so a bad path fails before any work.
    pub fn prepare(&self) -> Result<(), Failure> {
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).expect("output serializes");
        self.write(name, &(text + "\n"))
    }

    pub fn finish(self, config: serde_json::Value) -> Result<(), Failure> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Failure::io(&path, e))
    }
}

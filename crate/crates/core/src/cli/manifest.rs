use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one artifact-producing run.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub seeds: Vec<u64>,
    /// SHA-256 of every file read, keyed by path.
    pub input_hashes: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    pub wall_time_seconds: f64,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Collects inputs and outputs while a command runs.
pub struct Recorder {
    out: PathBuf,
    start: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Recorder {
    pub fn new(out: &Path) -> Self {
        Recorder {
            out: out.to_path_buf(),
            start: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Reads an input file, recording its hash.
    pub fn read_input(&mut self, path: &Path) -> io::Result<String> {
        let bytes = fs::read(path)?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        seed: u64,
        exit_code: u8,
        error: Option<String>,
    ) -> io::Result<PathBuf> {
        let manifest = RunManifest {
            command: command.into(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seeds: vec![seed],
            input_hashes: self.inputs,
            output_paths: self.outputs,
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
            exit_code,
            error,
        };
        fs::create_dir_all(&self.out)?;
        let path = self.out.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(&path, text)?;
        Ok(path)
    }
}

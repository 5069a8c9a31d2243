use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use huemap_core::raster::payload_path;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
struct FileEntry {
    path: PathBuf,
    sha256: String,
    bytes: u64,
}

/// Record of one run: the command, its full configuration and content
/// hashes of every file read and written.
#[derive(Debug)]
pub struct Manifest {
    command: &'static str,
    config: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let mut f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        total += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok((format!("{:x}", hasher.finalize()), total))
}

impl Manifest {
    pub fn new(command: &'static str, config: impl Serialize) -> Self {
        Manifest {
            command,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Adds a raster header together with its payload file.
    pub fn input_raster(&mut self, header: &Path) {
        self.input(header);
        self.input(&payload_path(header));
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn output_raster(&mut self, header: &Path) {
        self.output(header);
        self.output(&payload_path(header));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let entries = |paths: &[PathBuf]| -> Result<Vec<FileEntry>, CliError> {
            paths
                .iter()
                .map(|p| {
                    let (sha256, bytes) = sha256_file(p)?;
                    Ok(FileEntry {
                        path: p.clone(),
                        sha256,
                        bytes,
                    })
                })
                .collect()
        };
        let doc = serde_json::json!({
            "tool": "huemap",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "inputs": entries(&self.inputs)?,
            "outputs": entries(&self.outputs)?,
        });
        let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

/// Files written by one run, with their digests for the manifest.
pub struct Artifacts {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let bytes = bytes.as_ref();
        fs::write(self.dir.join(name), bytes)?;
        self.outputs.push(OutputEntry { file: name.into(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Writes `manifest.json`. `config` carries every default the run used.
    pub fn finish(
        self,
        experiment: &str,
        config: &impl Serialize,
        resolved: serde_json::Value,
        seed: u64,
    ) -> Result<(), CliError> {
        let config = serde_json::to_value(config)?;
        let canonical = serde_json::to_string(&config)?;
        let manifest = serde_json::json!({
            "experiment": experiment,
            "config": config,
            "config_hash": sha256_hex(canonical.as_bytes()),
            "resolved": resolved,
            "seed": seed,
            "versions": {
                "sphmax": env!("CARGO_PKG_VERSION"),
                "measure_format": sphmax_core::measures::io::FORMAT_VERSION,
                "measure_magic": String::from_utf8_lossy(sphmax_core::measures::io::MAGIC),
                "field_magic": String::from_utf8_lossy(sphmax_core::spectral::io::MAGIC),
            },
            "outputs": self.outputs,
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}

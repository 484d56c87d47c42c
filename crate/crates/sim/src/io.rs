//! Config files, CSV output and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a spec from a JSON file. A run manifest is accepted as well, in
/// which case its `spec` member is used.
pub fn load_spec<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_spec(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_spec<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if value.get("spec_sha256").is_some() {
        if let Some(spec) = value.get_mut("spec") {
            value = spec.take();
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
}

/// Hex SHA-256 of a config's canonical JSON encoding.
pub fn spec_hash<T: Serialize>(spec: &T) -> String {
    let bytes = serde_json::to_vec(spec).expect("spec serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub spec_sha256: String,
    pub wall_time_seconds: f64,
    pub parallelism: Option<usize>,
    pub output: PathBuf,
    pub spec: T,
}

impl<T: Serialize> Manifest<T> {
    pub fn new(command: &str, seed: u64, spec: T, output: &Path, wall: f64, parallelism: Option<usize>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            spec_sha256: spec_hash(&spec),
            wall_time_seconds: wall,
            parallelism,
            output: output.to_path_buf(),
            spec,
        }
    }
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Square matrix from CSV text: one row per line, comma separated, no
/// header. Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, line)| {
            line.split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::Config(format!("line {}: '{}': {e}", i + 1, f.trim()))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix_csv(&text)
}

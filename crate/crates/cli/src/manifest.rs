//! Run manifests written next to every output file.
//!
//! A manifest holds the canonical argument list of the run, so `nodal replay`
//! can regenerate the outputs and compare them byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const TOOL: &str = "nodal";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// File name relative to the manifest's directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: serde_json::Value,
    /// Arguments that reproduce the run, without `--out`.
    pub args: Vec<String>,
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `dir/stem.csv` becomes `dir/stem.manifest.json`.
pub fn manifest_path(primary: &Path) -> PathBuf {
    primary.with_extension("manifest.json")
}

/// `dir/stem.csv` becomes `dir/stem.<tag>.csv`.
pub fn sibling(primary: &Path, tag: &str) -> PathBuf {
    let ext = primary
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_default();
    if ext.is_empty() {
        primary.with_extension(tag)
    } else {
        primary.with_extension(format!("{tag}.{ext}"))
    }
}

/// Collects the files of one run and writes them with their manifest.
pub struct Outputs {
    primary: PathBuf,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn new(primary: &Path) -> Self {
        Outputs {
            primary: primary.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    /// Writes every file, then the manifest, and returns the manifest path.
    pub fn finish(
        self,
        command: &str,
        parameters: serde_json::Value,
        args: Vec<String>,
    ) -> Result<PathBuf> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
            outputs.push(OutputFile {
                path: relative_name(path),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            });
        }
        let canonical = serde_json::to_vec(&parameters).expect("parameters serialise");
        let manifest = RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            parameters,
            args,
            input_hashes: BTreeMap::from([("parameters".into(), sha256_hex(&canonical))]),
            outputs,
        };
        let path = manifest_path(&self.primary);
        let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
        text.push(b'\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn relative_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&text).map_err(|source| CliError::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

/// Compares the files under `dir` with the hashes recorded in `manifest`.
pub fn check_outputs(manifest: &RunManifest, dir: &Path) -> Result<()> {
    let mut differing = Vec::new();
    for out in &manifest.outputs {
        let path = dir.join(&out.path);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        if sha256_hex(&bytes) != out.sha256 {
            differing.push(out.path.clone());
        }
    }
    if differing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "replayed outputs differ: {}",
            differing.join(", ")
        )))
    }
}

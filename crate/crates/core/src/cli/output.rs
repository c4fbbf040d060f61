//! Result files: CSV tables, SHA-256 digests and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::simulate::CellSeeds;
use crate::topology::TopologyKind;

/// Serializes `rows` with a header taken from the field names, in field
/// order.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Collects output files and their digests, written in insertion order.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)?;
        log::info!("wrote {}", path.display());
        self.files.push(OutputFile { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }
}

/// Seeds used by one cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeedRecord {
    pub topology: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub realization: usize,
    pub reservoir_seed: u64,
    pub input_weights_seed: u64,
    pub signal_seed: u64,
}

impl CellSeedRecord {
    pub fn new(topology: TopologyKind, n: usize, rho: f64, realization: usize, seeds: CellSeeds) -> Self {
        Self {
            topology,
            n,
            rho,
            realization,
            reservoir_seed: seeds.reservoir,
            input_weights_seed: seeds.input_weights,
            signal_seed: seeds.signal,
        }
    }
}

/// Everything needed to regenerate an experiment's outputs bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub master_seed: u64,
    pub seed_derivation: String,
    pub cells: Vec<CellSeedRecord>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputFile>,
}

pub const SEED_DERIVATION: &str = "splitmix64 fold of master_seed with: reservoir [0, topology tag, n, rho bits, realization]; \
input weights [1, n, realization]; signal [2, n, realization]; each seed keys a ChaCha8 stream (0 = W, 1 = w, 2 = signal)";

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Compares digests against a fresh set of outputs. Every file recorded
    /// here must be reproduced byte for byte.
    pub fn verify_against(&self, fresh: &[OutputFile]) -> Result<()> {
        let fresh: BTreeMap<&str, &str> = fresh.iter().map(|f| (f.file.as_str(), f.sha256.as_str())).collect();
        let mut problems = Vec::new();
        for f in &self.outputs {
            match fresh.get(f.file.as_str()) {
                None => problems.push(format!("{} was not regenerated", f.file)),
                Some(&d) if d != f.sha256 => problems.push(format!("{} digest {} != recorded {}", f.file, d, f.sha256)),
                Some(_) => {}
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Verification(problems.join("; ")))
        }
    }
}

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use qudit_magic::densesim::DenseState;
use qudit_magic::ensembles::{EstimateRecord, ExperimentConfig, SampleRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    Core(qudit_magic::Error),
    /// Unreadable or malformed input, or an I/O failure.
    Input(String),
}

impl CliError {
    pub fn io(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) => write!(f, "{s}"),
        }
    }
}

impl From<qudit_magic::Error> for CliError {
    fn from(e: qudit_magic::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Pure state on `N` qudits; amplitudes as `[re, im]` pairs, site 0 most
/// significant.
#[derive(Debug, Deserialize)]
pub struct StateFile {
    pub q: u64,
    #[serde(rename = "N", alias = "n_sites")]
    pub n_sites: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn into_state(self) -> Result<DenseState, CliError> {
        let amps = self
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Ok(DenseState::from_amplitudes(self.q, self.n_sites, amps)?)
    }
}

/// `summary.json` of a run directory.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub policy: Vec<String>,
    pub records: Vec<EstimateRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(cfg).map_err(CliError::io)?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

pub fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Round-trippable float formatting for CSV output.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_samples(path: &Path, samples: &[SampleRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::io)?;
    w.write_record(["sample_id", "seed", "measure", "value"])
        .map_err(CliError::io)?;
    for s in samples {
        w.write_record([
            s.sample_id.to_string(),
            s.seed.to_string(),
            s.measure.clone(),
            float(s.value),
        ])
        .map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

/// Writes to stdout; a closed pipe downstream is not an error.
pub fn emit(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(e)),
        _ => Ok(()),
    }
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    text.push('\n');
    emit(text.as_bytes())
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use eitcool::dynamics::SolverMeta;
use eitcool::ModelParams;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub runs: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub max_hermiticity_residual: f64,
    /// Smallest density-matrix eigenvalue seen at the positivity checks.
    pub min_eigenvalue: Option<f64>,
}

impl Default for SolverSummary {
    fn default() -> Self {
        SolverSummary {
            runs: 0,
            accepted_steps: 0,
            rejected_steps: 0,
            rhs_evaluations: 0,
            max_hermiticity_residual: 0.0,
            min_eigenvalue: None,
        }
    }
}

impl SolverSummary {
    pub fn record(&mut self, meta: &SolverMeta) {
        self.runs += 1;
        self.accepted_steps += meta.stats.accepted;
        self.rejected_steps += meta.stats.rejected;
        self.rhs_evaluations += meta.stats.evaluations;
        self.max_hermiticity_residual = self.max_hermiticity_residual.max(meta.max_hermiticity_residual);
        if meta.min_eigenvalue.is_finite() {
            let m = self.min_eigenvalue.map_or(meta.min_eigenvalue, |v| v.min(meta.min_eigenvalue));
            self.min_eigenvalue = Some(m);
        }
    }
}

/// How internal (ω_m-scaled) numbers map back to SI.
#[derive(Debug, Clone, Serialize)]
pub struct UnitBlock {
    pub omega_m_rad_per_s: f64,
    /// One internal time unit, 1/ω_m, in seconds.
    pub time_unit_s: f64,
    /// An internal rate r corresponds to r·ω_m/2π in Hz.
    pub rate_unit_hz: f64,
    pub temperature_k: f64,
    pub thermal_occupation: f64,
    pub note: &'static str,
}

impl UnitBlock {
    pub fn new(p: &ModelParams) -> Self {
        UnitBlock {
            omega_m_rad_per_s: p.omega_m,
            time_unit_s: 1.0 / p.omega_m,
            rate_unit_hz: p.omega_m / eitcool::constants::TWO_PI,
            temperature_k: p.temperature,
            thermal_occupation: p.thermal_n(),
            note: "config keys ending in _hz/_mhz were divided by omega_m/2pi, _mk multiplied by 1e-3",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub status: String,
    pub error: Option<String>,
    pub code_version: String,
    pub config_file: Option<String>,
    pub config: BTreeMap<String, String>,
    pub units: UnitBlock,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub threads: usize,
    pub progress: Progress,
    pub outputs: Vec<OutputFile>,
    pub solver: SolverSummary,
    pub summary: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Write a comma-separated table and return its manifest entry.
pub fn write_table(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<OutputFile, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", header.join(",")).expect("vec write");
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        writeln!(buf, "{}", r.join(",")).expect("vec write");
    }
    write_bytes(dir, name, &buf, rows.len())
}

pub fn write_bytes(dir: &Path, name: &str, bytes: &[u8], rows: usize) -> Result<OutputFile, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(OutputFile {
        file: name.to_string(),
        sha256: sha256_hex(bytes),
        rows,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fixed number formatting for every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

//! CSV tables and the JSON run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CliError, Named};
use crate::classical::{ClassicalProcess, SpectralTrajectory};
use crate::measure::TraceNormTrajectory;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::propagator::PropagatorTable;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Manifest of one command run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub argv: Vec<String>,
    /// SHA-256 of the canonical configuration JSON.
    pub config_hash: String,
    pub seed: u64,
    pub verdicts: Named<bool>,
    pub measures: Named<f64>,
    pub files: Vec<ManifestEntry>,
    #[serde(skip)]
    out: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Compact JSON used for hashing.
pub fn canonical<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

impl RunReport {
    pub fn new(command: &str, argv: Vec<String>, canonical_config: &str, seed: u64, out: &Path) -> Self {
        Self {
            command: command.to_string(),
            argv,
            config_hash: sha256_hex(canonical_config.as_bytes()),
            seed,
            verdicts: Named::new(),
            measures: Named::new(),
            files: Vec::new(),
            out: out.to_path_buf(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let bytes = csv_bytes(header, rows);
        self.write_bytes(name, &bytes)
    }

    /// Writes `report.json` and hands the manifest back.
    pub fn finish(self) -> Result<Self, CliError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join("report.json");
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(self)
    }
}

/// RFC 4180 CSV with shortest round-trip float formatting.
pub fn csv_bytes(header: &[String], rows: &[Vec<f64>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `t, x, y, z, trace, min_eigenvalue` for qubits; real and imaginary
/// parts of every entry otherwise.
pub fn state_rows(table: &PropagatorTable, rho0: &DensityMatrix) -> (Vec<String>, Vec<Vec<f64>>) {
    let d = table.dim();
    let mut header = vec!["t".to_string()];
    if d == 2 {
        header.extend(["x", "y", "z"].map(String::from));
    } else {
        for i in 0..d {
            for j in 0..d {
                header.push(format!("re_{i}{j}"));
                header.push(format!("im_{i}{j}"));
            }
        }
    }
    header.extend(["trace", "min_eigenvalue"].map(String::from));
    let rows = table
        .times()
        .iter()
        .zip(table.maps())
        .map(|(&t, map)| {
            let rho = map.apply(rho0.matrix());
            let mut row = vec![t];
            if d == 2 {
                row.push(2.0 * rho[(0, 1)].re);
                row.push(-2.0 * rho[(0, 1)].im);
                row.push(rho[(0, 0)].re - rho[(1, 1)].re);
            } else {
                for i in 0..d {
                    for j in 0..d {
                        row.push(rho[(i, j)].re);
                        row.push(rho[(i, j)].im);
                    }
                }
            }
            row.push(rho.trace().re);
            row.push(HermitianOperator::hermitize(&rho).min_eigenvalue());
            row
        })
        .collect();
    (header, rows)
}

pub fn trace_norm_rows(traj: &TraceNormTrajectory) -> (Vec<String>, Vec<Vec<f64>>) {
    let rows = (0..traj.times.len())
        .map(|k| vec![traj.times[k], traj.values[k], traj.sigma[k]])
        .collect();
    (["t", "trace_norm", "sigma"].map(String::from).to_vec(), rows)
}

pub fn probability_rows(process: &ClassicalProcess) -> (Vec<String>, Vec<Vec<f64>>) {
    let d = process.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|m| format!("p_{m}")));
    header.push("min_offdiag_W".into());
    let rows = (0..process.times.len())
        .map(|k| {
            let mut row = vec![process.times[k]];
            row.extend(&process.probabilities[k]);
            row.push(process.margins[k]);
            row
        })
        .collect();
    (header, rows)
}

/// Off-diagonal `W_mn(t)`, right limit, row-major.
pub fn rate_rows(process: &ClassicalProcess) -> (Vec<String>, Vec<Vec<f64>>) {
    let d = process.dim();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|m| (0..d).filter(move |&n| n != m).map(move |n| (m, n)))
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend(pairs.iter().map(|(m, n)| format!("W_{}{}", m + 1, n + 1)));
    let rows = (0..process.times.len())
        .map(|k| {
            let mut row = vec![process.times[k]];
            row.extend(pairs.iter().map(|&(m, n)| process.rates[k][(m, n)]));
            row
        })
        .collect();
    (header, rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalSummary {
    pub times: Vec<f64>,
    pub margins: Vec<f64>,
    pub min_offdiag: f64,
    pub degenerate: Vec<bool>,
    /// Final-time rate matrix, row-major.
    pub final_rates: Vec<Vec<f64>>,
}

impl ClassicalSummary {
    pub fn new(process: &ClassicalProcess, traj: &SpectralTrajectory) -> Self {
        let last = process.rates_left.last().expect("nonempty grid");
        Self {
            times: process.times.clone(),
            margins: process.margins.clone(),
            min_offdiag: process.min_offdiag,
            degenerate: traj.degenerate.clone(),
            final_rates: last.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

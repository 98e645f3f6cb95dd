//! Result tables on disk: CSV or JSON plus a run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::config::ScenarioConfig;
use crate::engine::run::{CaseMetrics, UeMetrics};
use crate::engine::scenario::Scenario;
use crate::format::sig9;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "n_elements",
    "ris_x",
    "ris_y",
    "ris_z",
    "sumse_target_ris",
    "sumse_target_noris",
    "sumse_nontarget_ris",
    "sumse_nontarget_noris",
    "degradation_ratio",
];

/// One exported row; JSON carries the same fields as the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub n_elements: usize,
    pub ris_x: f64,
    pub ris_y: f64,
    pub ris_z: f64,
    pub sumse_target_ris: f64,
    pub sumse_target_noris: f64,
    pub sumse_nontarget_ris: f64,
    pub sumse_nontarget_noris: f64,
    pub degradation_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_ue: Option<Vec<UeMetrics>>,
}

impl ResultRow {
    pub fn from_metrics(m: &CaseMetrics, per_ue: bool) -> Self {
        Self {
            n_elements: m.n_elements,
            ris_x: m.ris_position[0],
            ris_y: m.ris_position[1],
            ris_z: m.ris_position[2],
            sumse_target_ris: m.sumse_target_ris.mean,
            sumse_target_noris: m.sumse_target_noris.mean,
            sumse_nontarget_ris: m.sumse_nontarget_ris.mean,
            sumse_nontarget_noris: m.sumse_nontarget_noris.mean,
            degradation_ratio: m.degradation_ratio,
            per_ue: per_ue.then(|| m.ues.clone()),
        }
    }

    fn csv_record(&self) -> [String; 9] {
        [
            self.n_elements.to_string(),
            sig9(self.ris_x),
            sig9(self.ris_y),
            sig9(self.ris_z),
            sig9(self.sumse_target_ris),
            sig9(self.sumse_target_noris),
            sig9(self.sumse_nontarget_ris),
            sig9(self.sumse_nontarget_noris),
            sig9(self.degradation_ratio),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    /// Guess from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ExportFormat::Json,
            _ => ExportFormat::Csv,
        }
    }
}

/// Provenance written next to every export. Contains nothing that varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub master_seed: u64,
    pub realizations: usize,
    pub seed_rule: String,
    pub warnings: Vec<String>,
    pub rows: usize,
}

pub fn manifest(s: &Scenario, rows: usize) -> Manifest {
    Manifest {
        tool: "risim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: s.config.clone(),
        master_seed: s.config.seed,
        realizations: s.config.realizations,
        seed_rule: "splitmix64 fold of [link, operator, ue, realization] onto the master seed; link 0 = direct, 1 = BS to RIS, 2 = RIS to UE".into(),
        warnings: s.warnings.clone(),
        rows,
    }
}

fn manifest_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}.manifest.json"))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Render rows as CSV text.
pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Numerical(format!("csv encoding failed: {e}"));
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for r in rows {
        w.write_record(r.csv_record()).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

/// Write `rows` to `path` and the manifest to `<stem>.manifest.json`.
/// Returns the manifest path.
pub fn export_results(rows: &[ResultRow], format: ExportFormat, path: &Path, manifest: &Manifest) -> Result<PathBuf> {
    if rows.is_empty() {
        return Err(Error::Contract("nothing to export".into()));
    }
    let body = match format {
        ExportFormat::Csv => csv_string(rows)?,
        ExportFormat::Json => serde_json::to_string_pretty(rows).map_err(|e| Error::Numerical(e.to_string()))? + "\n",
    };
    write(path, body.as_bytes())?;
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Numerical(e.to_string()))? + "\n";
    write(&mpath, text.as_bytes())?;
    Ok(mpath)
}

/// Load a JSON export back into rows.
pub fn read_results_json(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

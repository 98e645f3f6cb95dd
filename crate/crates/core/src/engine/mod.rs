//! Scenario assembly, Monte-Carlo runs, sweeps, bandwidth of influence and export.

mod boi;
pub mod config;
mod export;
mod pattern;
mod presets;
mod run;
mod scenario;

pub use boi::{fractional_boi, BoiEntry, FIVE_G_EXAMPLE, MEASURED_BANDS};
pub use config::*;
pub use export::{csv_string, export_results, CSV_HEADER, manifest, read_results_json, ExportFormat, Manifest, ResultRow};
pub use pattern::{pattern_study, squint_sensitivity, PatternCurve, PatternReport, SensitivityEntry, SensitivityReport};
pub use presets::{preset, preset_names, preset_text};
pub use run::{run_case, sweep, CaseMetrics, MeanStat, TuningDiagnostics, UeMetrics};
pub use scenario::{load_scenario, Scenario};

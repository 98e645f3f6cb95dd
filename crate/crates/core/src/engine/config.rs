//! Scenario configuration schema.
//!
//! Configs are JSON. Every struct rejects unknown fields and fills omitted
//! ones with documented defaults, so re-serializing a loaded config yields
//! the complete, materialized setup used for the run.

use serde::{Deserialize, Serialize};

use crate::array::{ElementPattern, PatternCut, Placement};
use crate::channels::Fading;
use crate::circuit::CircuitParams;
use crate::tuning::AscentOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub circuit: CircuitParams,
    pub ris: RisConfig,
    pub operators: Vec<OperatorConfig>,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default)]
    pub precoding: PrecodingConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub pattern: Option<PatternConfig>,
}

fn default_seed() -> u64 {
    1
}

fn default_realizations() -> usize {
    500
}

fn default_true() -> bool {
    true
}

fn default_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths at `design_frequency`.
    #[serde(default = "default_half")]
    pub spacing_fraction: f64,
    /// Frequency fixing the physical spacing; defaults to the owner's carrier.
    #[serde(default)]
    pub design_frequency: Option<f64>,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub element_pattern: ElementPattern,
    /// Idealized ultra-narrowband surface: transparent (gamma = 0) to every
    /// carrier other than the one it was tuned on.
    #[serde(default)]
    pub ideal_narrowband: bool,
    /// Bandwidth of influence `[f_low, f_high]` (Hz); carriers outside it only raise a warning.
    #[serde(default)]
    pub boi_hz: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    Mrt,
    #[default]
    Zf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub name: String,
    pub carrier_hz: f64,
    #[serde(default)]
    pub owns_ris: bool,
    pub bs: BsConfig,
    #[serde(default)]
    pub precoder: PrecoderKind,
    /// Whether precoders are designed on channels that include the surface.
    /// Defaults to `owns_ris`: only the owner knows the surface state.
    #[serde(default)]
    pub ris_aware_precoding: Option<bool>,
    pub ues: Vec<UeConfig>,
}

impl OperatorConfig {
    pub fn ris_aware(&self) -> bool {
        self.ris_aware_precoding.unwrap_or(self.owns_ris)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsConfig {
    pub position: [f64; 3],
    #[serde(default = "default_antennas")]
    pub antennas: usize,
    /// Antenna spacing in wavelengths at the operator's carrier.
    #[serde(default = "default_half")]
    pub spacing_fraction: f64,
    #[serde(default)]
    pub axis_azimuth_deg: f64,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
}

fn default_antennas() -> usize {
    1
}

fn default_tx_power() -> f64 {
    30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Target,
    NonTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeConfig {
    pub id: String,
    pub role: Role,
    pub position: [f64; 3],
    /// Weight in the targets' weighted sum power.
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default)]
    pub direct_blocked: bool,
    /// Out-of-system interference power at this UE (W).
    #[serde(default)]
    pub external_interference_w: f64,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub fading: Fading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "NoiseConfig::default_density")]
    pub density_dbm_per_hz: f64,
    #[serde(default = "NoiseConfig::default_nf")]
    pub noise_figure_db: f64,
    #[serde(default = "NoiseConfig::default_bandwidth")]
    pub bandwidth_hz: f64,
}

impl NoiseConfig {
    fn default_density() -> f64 {
        -174.0
    }
    fn default_nf() -> f64 {
        9.0
    }
    fn default_bandwidth() -> f64 {
        10e6
    }

    pub fn power_w(&self) -> f64 {
        crate::precoding::noise_power_w(self.density_dbm_per_hz, self.noise_figure_db, self.bandwidth_hz)
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            density_dbm_per_hz: Self::default_density(),
            noise_figure_db: Self::default_nf(),
            bandwidth_hz: Self::default_bandwidth(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    /// Coordinate-ascent sweep limit.
    #[serde(default = "TuningConfig::default_max_iters")]
    pub max_iters: usize,
    /// Relative improvement per sweep below which ascent stops.
    #[serde(default = "TuningConfig::default_tol")]
    pub tol: f64,
    /// Quantize ideal phases to `2^bits` levels before realization.
    #[serde(default)]
    pub phase_bits: Option<u32>,
}

impl TuningConfig {
    fn default_max_iters() -> usize {
        AscentOptions::default().max_iters
    }
    fn default_tol() -> f64 {
        AscentOptions::default().tol
    }

    pub fn ascent(&self) -> AscentOptions {
        AscentOptions {
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            max_iters: Self::default_max_iters(),
            tol: Self::default_tol(),
            phase_bits: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecodingConfig {
    /// Condition number of the RIS owner's stacked channel above which a
    /// correlated-channel diagnostic is raised.
    #[serde(default = "PrecodingConfig::default_threshold")]
    pub correlation_threshold: f64,
}

impl PrecodingConfig {
    fn default_threshold() -> f64 {
        100.0
    }
}

impl Default for PrecodingConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: Self::default_threshold(),
        }
    }
}

/// Grid of surface sizes and positions to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Element counts; each must be a multiple of `ris.cols`.
    pub element_counts: Vec<usize>,
    pub ris_positions: Vec<[f64; 3]>,
    /// Include per-UE metrics in JSON exports.
    #[serde(default)]
    pub per_ue: bool,
}

/// Reflection-pattern study of the tuned surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternConfig {
    pub frequencies: Vec<f64>,
    #[serde(default = "PatternConfig::default_start")]
    pub angle_start_deg: f64,
    #[serde(default = "PatternConfig::default_stop")]
    pub angle_stop_deg: f64,
    #[serde(default = "PatternConfig::default_step")]
    pub angle_step_deg: f64,
    #[serde(default)]
    pub cut: PatternCut,
    /// Observe on a circle through the first target instead of `cut.radius`.
    #[serde(default = "default_true")]
    pub observe_at_target: bool,
    /// Expected main lobe of one frequency; a miss triggers a sensitivity report.
    #[serde(default)]
    pub expected_lobe: Option<ExpectedLobe>,
}

impl PatternConfig {
    fn default_start() -> f64 {
        -90.0
    }
    fn default_stop() -> f64 {
        90.0
    }
    fn default_step() -> f64 {
        0.25
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedLobe {
    pub frequency: f64,
    pub angle_deg: f64,
    pub tolerance_deg: f64,
}

//! Parsing and validation of scenario configs.

use std::collections::HashSet;

use crate::array::{build_array, RisArray};
use crate::channels::Node;
use crate::engine::config::{OperatorConfig, Role, ScenarioConfig};
use crate::{wavelength, Error, Result, Vec3};

/// A validated scenario with every default materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Non-fatal findings, such as carriers outside the surface's BoI.
    pub warnings: Vec<String>,
}

/// Parse JSON config text and validate it.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })?;
    Scenario::new(config)
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {x}")))
    }
}

fn finite3(field: &str, p: &[f64; 3]) -> Result<()> {
    if p.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::config(field, "coordinates must be finite"))
    }
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let mut warnings = Vec::new();
        let c = &config;
        c.circuit.validate().map_err(|e| Error::config("circuit", e.to_string()))?;

        if c.operators.is_empty() {
            return Err(Error::config("operators", "at least one operator is required"));
        }
        let owners: Vec<usize> = c.operators.iter().enumerate().filter(|(_, o)| o.owns_ris).map(|(i, _)| i).collect();
        if owners.len() != 1 {
            return Err(Error::config("operators", format!("exactly one operator must own the RIS, found {}", owners.len())));
        }
        let mut carriers: Vec<f64> = Vec::new();
        let mut ids = HashSet::new();
        let mut names = HashSet::new();
        for (i, op) in c.operators.iter().enumerate() {
            let at = |f: &str| format!("operators[{i}].{f}");
            positive(&at("carrier_hz"), op.carrier_hz)?;
            if carriers.contains(&op.carrier_hz) {
                return Err(Error::config(at("carrier_hz"), "carrier frequencies must be distinct per operator"));
            }
            carriers.push(op.carrier_hz);
            if !names.insert(op.name.clone()) {
                return Err(Error::config(at("name"), format!("duplicate operator name `{}`", op.name)));
            }
            finite3(&at("bs.position"), &op.bs.position)?;
            if op.bs.antennas == 0 {
                return Err(Error::config(at("bs.antennas"), "at least one antenna is required"));
            }
            positive(&at("bs.spacing_fraction"), op.bs.spacing_fraction)?;
            if !op.bs.tx_power_dbm.is_finite() {
                return Err(Error::config(at("bs.tx_power_dbm"), "must be finite"));
            }
            if op.ues.is_empty() {
                return Err(Error::config(at("ues"), "every operator serves at least one UE"));
            }
            for (j, ue) in op.ues.iter().enumerate() {
                let at = |f: &str| format!("operators[{i}].ues[{j}].{f}");
                if !ids.insert(ue.id.clone()) {
                    return Err(Error::config(at("id"), format!("duplicate UE id `{}`", ue.id)));
                }
                finite3(&at("position"), &ue.position)?;
                positive(&at("weight"), ue.weight)?;
                if !(ue.external_interference_w >= 0.0) {
                    return Err(Error::config(at("external_interference_w"), "must be non-negative"));
                }
                if ue.role == Role::Target && !op.owns_ris {
                    return Err(Error::config(at("role"), "targets must be served by the RIS owner"));
                }
            }
        }
        let owner = &c.operators[owners[0]];
        if c.ris.enabled && !owner.ues.iter().any(|u| u.role == Role::Target) {
            return Err(Error::config("operators", "the RIS owner has no target UE"));
        }
        if c.ris.rows == 0 || c.ris.cols == 0 {
            return Err(Error::config("ris", "rows and cols must be positive"));
        }
        positive("ris.spacing_fraction", c.ris.spacing_fraction)?;
        if let Some(f) = c.ris.design_frequency {
            positive("ris.design_frequency", f)?;
        }
        finite3("ris.placement.center", &c.ris.placement.center)?;
        if let Some([lo, hi]) = c.ris.boi_hz {
            if !(hi >= lo && lo > 0.0) {
                return Err(Error::config("ris.boi_hz", "expected [f_low, f_high] with 0 < f_low <= f_high"));
            }
            for op in &c.operators {
                if op.carrier_hz < lo || op.carrier_hz > hi {
                    warnings.push(format!(
                        "carrier {} Hz of operator `{}` lies outside the RIS BoI [{lo}, {hi}] Hz",
                        op.carrier_hz, op.name
                    ));
                }
            }
        }
        if let crate::channels::Fading::Rician { k_db } = c.channel.fading {
            if !k_db.is_finite() {
                return Err(Error::config("channel.fading.k_db", "must be finite"));
            }
        }
        positive("noise.bandwidth_hz", c.noise.bandwidth_hz)?;
        if !(c.noise.density_dbm_per_hz.is_finite() && c.noise.noise_figure_db.is_finite()) {
            return Err(Error::config("noise", "density and noise figure must be finite"));
        }
        if c.tuning.max_iters == 0 {
            return Err(Error::config("tuning.max_iters", "must be at least 1"));
        }
        if !(c.tuning.tol >= 0.0) {
            return Err(Error::config("tuning.tol", "must be non-negative"));
        }
        if let Some(b) = c.tuning.phase_bits {
            if !(1..=16).contains(&b) {
                return Err(Error::config("tuning.phase_bits", "must be in 1..=16"));
            }
        }
        positive("precoding.correlation_threshold", c.precoding.correlation_threshold)?;
        if c.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if let Some(s) = &c.sweep {
            if s.element_counts.is_empty() || s.ris_positions.is_empty() {
                return Err(Error::config("sweep", "element_counts and ris_positions must be non-empty"));
            }
            for (i, &n) in s.element_counts.iter().enumerate() {
                if n == 0 || n % c.ris.cols != 0 {
                    return Err(Error::config(
                        format!("sweep.element_counts[{i}]"),
                        format!("{n} is not a positive multiple of ris.cols = {}", c.ris.cols),
                    ));
                }
            }
            for (i, p) in s.ris_positions.iter().enumerate() {
                finite3(&format!("sweep.ris_positions[{i}]"), p)?;
            }
        }
        if let Some(p) = &c.pattern {
            if p.frequencies.is_empty() {
                return Err(Error::config("pattern.frequencies", "at least one frequency is required"));
            }
            for (i, &f) in p.frequencies.iter().enumerate() {
                positive(&format!("pattern.frequencies[{i}]"), f)?;
            }
            positive("pattern.angle_step_deg", p.angle_step_deg)?;
            if !(p.angle_stop_deg >= p.angle_start_deg) {
                return Err(Error::config("pattern.angle_stop_deg", "must not be below angle_start_deg"));
            }
            if let Some(r) = p.cut.radius {
                positive("pattern.cut.radius", r)?;
            }
        }
        Ok(Self { config, warnings })
    }

    pub fn owner_index(&self) -> usize {
        self.config.operators.iter().position(|o| o.owns_ris).expect("validated owner")
    }

    pub fn owner(&self) -> &OperatorConfig {
        &self.config.operators[self.owner_index()]
    }

    /// Frequency fixing the physical element spacing.
    pub fn design_frequency(&self) -> f64 {
        self.config.ris.design_frequency.unwrap_or(self.owner().carrier_hz)
    }

    /// The configured surface, placed and without a hardware state.
    pub fn array(&self) -> Result<RisArray> {
        let r = &self.config.ris;
        Ok(build_array(r.rows, r.cols, self.design_frequency(), r.spacing_fraction)?
            .with_placement(r.placement)
            .with_element_pattern(r.element_pattern))
    }

    /// Antenna array of operator `i`'s BS.
    pub fn bs_node(&self, i: usize) -> Result<Node> {
        let op = &self.config.operators[i];
        Node::ula(
            Vec3::from(op.bs.position),
            op.bs.antennas,
            op.bs.spacing_fraction * wavelength(op.carrier_hz),
            op.bs.axis_azimuth_deg,
        )
    }

    /// Same scenario with a different surface size and position.
    pub fn with_surface(&self, elements: usize, center: [f64; 3]) -> Result<Self> {
        let mut config = self.config.clone();
        if elements == 0 || !elements.is_multiple_of(config.ris.cols) {
            return Err(Error::config("sweep.element_counts", format!("{elements} is not a multiple of ris.cols = {}", config.ris.cols)));
        }
        config.ris.rows = elements / config.ris.cols;
        config.ris.placement.center = center;
        Ok(Self {
            config,
            warnings: self.warnings.clone(),
        })
    }
}

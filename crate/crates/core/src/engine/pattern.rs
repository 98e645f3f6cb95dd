//! Reflection patterns of the tuned surface across carriers (beam squint).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{angle_grid, directivity_pattern, main_lobe_angle, PatternCut, PatternSample, Wave};
use crate::circuit::CircuitParams;
use crate::engine::config::{ExpectedLobe, PatternConfig, Role};
use crate::engine::run::{synthesize, tune_owner};
use crate::engine::scenario::Scenario;
use crate::tuning::evaluate_off_frequency;
use crate::{Error, Result, Vec3};

/// Tolerance a sensitivity entry must meet to count as reproducing the expected lobe.
const SENSITIVITY_TOL_DEG: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCurve {
    pub frequency: f64,
    pub main_lobe_deg: f64,
    pub samples: Vec<PatternSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub l_top: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Main lobe at the tuning carrier.
    pub tuned_lobe_deg: f64,
    /// Main lobe at the expected-lobe frequency.
    pub lobe_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub expected: ExpectedLobe,
    pub entries: Vec<SensitivityEntry>,
    /// Entry closest to the expected angle.
    pub best: Option<SensitivityEntry>,
    /// Whether `best` lies within 5 degrees of the expected angle.
    pub reproduced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    /// Direction of the first target seen from the surface centre.
    pub target_angle_deg: f64,
    pub tuning_frequency: f64,
    pub clamped_fraction: f64,
    pub curves: Vec<PatternCurve>,
    /// Present when an expected lobe was configured and missed.
    pub sensitivity: Option<SensitivityReport>,
}

fn pattern_config(s: &Scenario) -> Result<&PatternConfig> {
    s.config
        .pattern
        .as_ref()
        .ok_or_else(|| Error::config("pattern", "scenario has no pattern section"))
}

struct Tuned {
    target_angle_deg: f64,
    tuning_frequency: f64,
    clamped_fraction: f64,
    curves: Vec<PatternCurve>,
}

/// Tune on realization 0 and cut the reflected field at each frequency.
/// The BS is treated as a point source at its node position.
fn tuned_patterns(s: &Scenario, frequencies: &[f64]) -> Result<Tuned> {
    let pc = pattern_config(s)?;
    if !s.config.ris.enabled {
        return Err(Error::config("ris.enabled", "pattern study needs an enabled RIS"));
    }
    let array = s.array()?;
    let chs = synthesize(s, &array, 0)?;
    let result = tune_owner(s, &chs)?;
    let owner = s.owner();
    let target = owner.ues.iter().find(|u| u.role == Role::Target).expect("validated target");
    let target_pos = Vec3::from(target.position);
    let center = array.placement.center();
    let cut = PatternCut {
        elevation_deg: pc.cut.elevation_deg,
        radius: if pc.observe_at_target { Some((target_pos - center).norm()) } else { pc.cut.radius },
    };
    let angles = angle_grid(pc.angle_start_deg, pc.angle_stop_deg, pc.angle_step_deg);
    let bs = Vec3::from(owner.bs.position);
    let curves = frequencies
        .iter()
        .map(|&f| {
            let state = evaluate_off_frequency(&result, f, &s.config.circuit)?;
            let samples = directivity_pattern(&array, &state, &Wave::point(bs, f), &angles, &cut)?;
            Ok(PatternCurve {
                frequency: f,
                main_lobe_deg: main_lobe_angle(&samples)?,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Tuned {
        target_angle_deg: array.placement.angle_of(target_pos),
        tuning_frequency: result.tuning_frequency(),
        clamped_fraction: result.clamped_fraction(),
        curves,
    })
}

/// Patterns at every configured frequency; a missed expected lobe adds a
/// sensitivity sweep over the top inductance and the capacitance range.
pub fn pattern_study(s: &Scenario) -> Result<PatternReport> {
    let pc = pattern_config(s)?;
    let t = tuned_patterns(s, &pc.frequencies)?;
    let sensitivity = match pc.expected_lobe {
        Some(e) => {
            let lobe = match t.curves.iter().find(|c| c.frequency == e.frequency) {
                Some(c) => c.main_lobe_deg,
                None => tuned_patterns(s, &[e.frequency])?.curves[0].main_lobe_deg,
            };
            if (lobe - e.angle_deg).abs() > e.tolerance_deg {
                Some(squint_sensitivity(s, e)?)
            } else {
                None
            }
        }
        None => None,
    };
    Ok(PatternReport {
        target_angle_deg: t.target_angle_deg,
        tuning_frequency: t.tuning_frequency,
        clamped_fraction: t.clamped_fraction,
        curves: t.curves,
        sensitivity,
    })
}

/// Top inductances (H) explored by the sensitivity sweep.
fn l_top_grid() -> Vec<f64> {
    (3..=15).map(|i| i as f64 * 0.1e-9).collect()
}

/// Capacitance ranges (F) explored by the sensitivity sweep.
const C_RANGES: [(f64, f64); 6] = [
    (0.47e-12, 2.35e-12),
    (0.3e-12, 2.35e-12),
    (0.47e-12, 3.5e-12),
    (0.3e-12, 5.0e-12),
    (0.2e-12, 1.5e-12),
    (0.8e-12, 2.35e-12),
];

/// Re-tune and re-measure the lobe for each circuit variant.
pub fn squint_sensitivity(s: &Scenario, expected: ExpectedLobe) -> Result<SensitivityReport> {
    let f_tune = s.owner().carrier_hz;
    let variants: Vec<CircuitParams> = l_top_grid()
        .into_iter()
        .flat_map(|l| {
            C_RANGES.iter().map(move |&(c_min, c_max)| CircuitParams {
                l_top: l,
                c_min,
                c_max,
                ..CircuitParams::default()
            })
        })
        .map(|mut p| {
            let base = &s.config.circuit;
            p.l_bottom = base.l_bottom;
            p.r_loss = base.r_loss;
            p.z0 = base.z0;
            p
        })
        .filter(|p| p.validate().is_ok())
        .collect();
    let entries = variants
        .par_iter()
        .map(|p| {
            let mut config = s.config.clone();
            config.circuit = *p;
            let variant = Scenario {
                config,
                warnings: Vec::new(),
            };
            let t = tuned_patterns(&variant, &[f_tune, expected.frequency])?;
            Ok(SensitivityEntry {
                l_top: p.l_top,
                c_min: p.c_min,
                c_max: p.c_max,
                tuned_lobe_deg: t.curves[0].main_lobe_deg,
                lobe_deg: t.curves[1].main_lobe_deg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = entries
        .iter()
        .min_by(|a, b| {
            let da = (a.lobe_deg - expected.angle_deg).abs();
            let db = (b.lobe_deg - expected.angle_deg).abs();
            da.total_cmp(&db)
        })
        .cloned();
    let reproduced = best.as_ref().is_some_and(|b| (b.lobe_deg - expected.angle_deg).abs() <= SENSITIVITY_TOL_DEG);
    Ok(SensitivityReport {
        expected,
        entries,
        best,
        reproduced,
    })
}

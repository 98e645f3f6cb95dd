//! Browser bindings for the simulator demo page.
//!
//! Three operations are exposed: the element reflection curve over the
//! varactor range, the reflection patterns of a tuned 20x20 surface at
//! several carriers, and the fractional bandwidth of influence. Each has a
//! plain Rust twin so the logic is testable off the browser.

use risim::circuit::{element_reflection, CircuitParams};
use risim::engine::{fractional_boi, pattern_study, preset, Scenario};
use wasm_bindgen::prelude::*;

/// Circuit defaults with the top inductance overridden (nH).
fn circuit(l_top_nh: f64) -> CircuitParams {
    CircuitParams {
        l_top: l_top_nh * 1e-9,
        ..CircuitParams::default()
    }
}

/// `samples` rows of `[capacitance_pf, |gamma|, phase_rad]`, flattened.
pub fn reflection_curve_native(f_hz: f64, l_top_nh: f64, samples: usize) -> Result<Vec<f64>, String> {
    let p = circuit(l_top_nh);
    p.validate().map_err(|e| e.to_string())?;
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let c = p.c_min + (p.c_max - p.c_min) * i as f64 / (samples - 1) as f64;
        let r = element_reflection(c, f_hz, &p).map_err(|e| e.to_string())?;
        out.extend([c * 1e12, r.gamma.norm(), r.phase()]);
    }
    Ok(out)
}

/// Surface tuned toward a UE at `target_deg` (3-4 m away); returns, per
/// frequency, `[main_lobe_deg, power_db at each angle...]` over -90..=90 in
/// 0.5 degree steps, concatenated.
pub fn squint_patterns_native(target_deg: f64, freqs_hz: &[f64], l_top_nh: f64) -> Result<Vec<f64>, String> {
    let base = preset("fig3").map_err(|e| e.to_string())?;
    let mut config = base.config;
    config.circuit = circuit(l_top_nh);
    let r = 3.0 * std::f64::consts::SQRT_2;
    let t = target_deg.to_radians();
    config.operators[0].ues[0].position = [r * t.sin(), r * t.cos(), 0.0];
    let pc = config.pattern.as_mut().expect("fig3 has a pattern section");
    pc.frequencies = freqs_hz.to_vec();
    pc.angle_step_deg = 0.5;
    pc.expected_lobe = None;
    let s = Scenario::new(config).map_err(|e| e.to_string())?;
    let report = pattern_study(&s).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for c in report.curves {
        out.push(c.main_lobe_deg);
        out.extend(c.samples.iter().map(|s| s.power_db.max(-60.0)));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn reflection_curve(f_hz: f64, l_top_nh: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    reflection_curve_native(f_hz, l_top_nh, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn squint_patterns(target_deg: f64, freqs_hz: Vec<f64>, l_top_nh: f64) -> Result<Vec<f64>, JsError> {
    squint_patterns_native(target_deg, &freqs_hz, l_top_nh).map_err(|e| JsError::new(&e))
}

/// Fractional BoI in percent.
#[wasm_bindgen]
pub fn boi_percent(f_low: f64, f_high: f64, f_center: Option<f64>) -> Result<f64, JsError> {
    fractional_boi(f_low, f_high, f_center)
        .map(|r| 100.0 * r)
        .map_err(|e| JsError::new(&e.to_string()))
}

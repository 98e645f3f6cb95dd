//! Surface configuration for target users.
//!
//! Tuning runs in two stages. First ideal unit-magnitude phases are chosen
//! for the targets at the tuning carrier; then each phase is realized as a
//! varactor capacitance. The capacitances are the frozen hardware state:
//! every other carrier sees `gamma(C, f_m)` evaluated from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::array::ScatteringState;
use crate::channels::{effective_channel, CMatrix, ChannelSet};
use crate::circuit::{element_reflection, CircuitParams, PhaseResponse, CAPACITANCE_TOL};
use crate::{wrap_phase, Error, Result, C64};

/// Options of the coordinate-ascent phase optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscentOptions {
    #[serde(default = "AscentOptions::default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "AscentOptions::default_tol")]
    pub tol: f64,
}

impl AscentOptions {
    fn default_max_iters() -> usize {
        200
    }
    fn default_tol() -> f64 {
        1e-6
    }
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iters: Self::default_max_iters(),
            tol: Self::default_tol(),
        }
    }
}

/// Outcome of the ideal-phase optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ascent {
    pub state: ScatteringState,
    /// Objective after initialization and after every full sweep.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Weighted sum of received powers `sum_u w_u |h_eff,u|^2`.
pub fn weighted_sum_power(chs: &ChannelSet, state: &ScatteringState, weights: &[f64]) -> Result<f64> {
    if weights.len() != chs.users() {
        return Err(Error::Contract(format!("{} weights for {} users", weights.len(), chs.users())));
    }
    let h = effective_channel(chs, state)?;
    Ok(weights.iter().enumerate().map(|(u, w)| w * h.row(u).norm_squared()).sum())
}

/// Unit BS beam used to reduce a multi-antenna link to a scalar one.
fn reference_beam(chs: &ChannelSet) -> nalgebra::DVector<C64> {
    let m = chs.antennas();
    if m == 1 {
        return nalgebra::DVector::from_element(1, C64::new(1.0, 0.0));
    }
    let direct = chs.direct_unblocked();
    let d = direct.row(0);
    if d.norm() > 0.0 {
        return d.adjoint() / C64::new(d.norm(), 0.0);
    }
    // Blocked: dominant direction of the per-element cascade rows.
    let rows = chs.cascade_rows(0);
    let svd = rows.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    v_t.row(0).adjoint()
}

/// Closed-form co-phasing for one target: element `n` gets
/// `arg(h_direct) - arg(ris_to_ue_n) - arg(bs_to_ris_n)`.
///
/// With several BS antennas the link is first reduced to a scalar through a
/// fixed beam: MRT on the direct path, or the dominant cascade direction when
/// the direct path is blocked.
pub fn align_phases_single_target(chs: &ChannelSet) -> Result<ScatteringState> {
    if chs.users() != 1 {
        return Err(Error::Contract(format!("single-target alignment given {} users", chs.users())));
    }
    let beam = reference_beam(chs);
    let direct = (chs.direct_unblocked().row(0) * &beam)[(0, 0)];
    let reference = if direct.norm() > 0.0 { direct.arg() } else { 0.0 };
    let per_element = chs.cascade_rows(0) * &beam;
    if per_element.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Numerical("all cascaded element gains vanish".into()));
    }
    let phases: Vec<f64> = per_element.iter().map(|c| wrap_phase(reference - c.arg())).collect();
    Ok(ScatteringState::from_phases(&phases, chs.frequency))
}

/// Coordinate ascent on `sum_u w_u |h_eff,u|^2` over unit-magnitude phases.
///
/// Each step sets one phase to its exact maximizer with all others fixed, so
/// the objective never decreases. Stops when a full sweep improves the
/// objective by less than `tol` (relative) or after `max_iters` sweeps.
#[allow(clippy::needless_range_loop)]
pub fn optimize_weighted_sum_power(chs: &ChannelSet, weights: &[f64], opts: &AscentOptions) -> Result<Ascent> {
    let k = chs.users();
    if k == 0 {
        return Err(Error::Contract("no target users".into()));
    }
    if weights.len() != k || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Contract("one positive weight per target is required".into()));
    }
    let n = chs.elements();
    let f = chs.frequency;

    // Start from co-phasing for the heaviest target.
    let lead = (0..k).fold(0, |b, u| if weights[u] > weights[b] { u } else { b });
    let mut phases = match align_phases_single_target(&chs.select(&[lead])) {
        Ok(s) => s.phases(),
        Err(_) => vec![0.0; n],
    };
    let cascades: Vec<CMatrix> = (0..k).map(|u| chs.cascade_rows(u)).collect();

    let state = ScatteringState::from_phases(&phases, f);
    let mut objective = weighted_sum_power(chs, &state, weights)?;
    let mut trace = vec![objective];
    let mut converged = false;

    for _ in 0..opts.max_iters {
        let previous = phases.clone();
        let mut h = effective_channel(chs, &ScatteringState::from_phases(&phases, f))?;
        for e in 0..n {
            let theta = C64::from_polar(1.0, phases[e]);
            let mut s = C64::new(0.0, 0.0);
            for u in 0..k {
                let b = cascades[u].row(e);
                let mut row = h.row_mut(u);
                row -= b * theta;
                s += row.dotc(&b) * weights[u];
            }
            // dotc conjugates its first argument; the maximizer is arg(sum w a b^H).
            let best = if s.norm() > 0.0 { (-s.arg()).rem_euclid(2.0 * PI) } else { phases[e] };
            let best = wrap_phase(best);
            let theta_new = C64::from_polar(1.0, best);
            for u in 0..k {
                let b = cascades[u].row(e);
                let mut row = h.row_mut(u);
                row += b * theta_new;
            }
            phases[e] = best;
        }
        let value = weighted_sum_power(chs, &ScatteringState::from_phases(&phases, f), weights)?;
        if value < objective {
            // Rounding noise at the optimum; keep the better state.
            phases = previous;
            converged = true;
            break;
        }
        let improvement = (value - objective) / objective.max(f64::MIN_POSITIVE);
        objective = value;
        trace.push(value);
        if improvement < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(Ascent {
        state: ScatteringState::from_phases(&phases, f),
        trace,
        converged,
    })
}

/// Snap phases to `2^bits` uniformly spaced levels.
pub fn quantize_phases(state: &ScatteringState, bits: u32) -> ScatteringState {
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let phases: Vec<f64> = state.phases().iter().map(|p| wrap_phase((p / step).round() * step)).collect();
    let mut out = ScatteringState::from_phases(&phases, state.frequency);
    for (o, g) in out.gammas.iter_mut().zip(&state.gammas) {
        *o *= g.norm();
    }
    out
}

/// An element whose ideal phase could not be produced by the varactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampEntry {
    pub element: usize,
    pub target_phase: f64,
    pub achieved_phase: f64,
    /// Wrapped phase error (rad).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    /// Ideal scattering state at the tuning frequency.
    pub theta_star: ScatteringState,
    /// Realized per-element capacitances (F).
    pub capacitances: Vec<f64>,
    pub clamp_report: Vec<ClampEntry>,
    /// Objective of the ideal state (W).
    pub ideal_objective: f64,
    /// Objective with the realized (lossy, possibly clamped) reflections (W).
    pub achieved_objective: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl TuningResult {
    pub fn tuning_frequency(&self) -> f64 {
        self.theta_star.frequency
    }

    pub fn clamped_fraction(&self) -> f64 {
        if self.capacitances.is_empty() {
            0.0
        } else {
            self.clamp_report.len() as f64 / self.capacitances.len() as f64
        }
    }
}

/// Map each ideal phase to a capacitance at the tuning frequency and score
/// the realized state on the targets' channels.
pub fn realize_capacitances(theta_star: &ScatteringState, p: &CircuitParams, targets: &ChannelSet, weights: &[f64]) -> Result<TuningResult> {
    let f1 = theta_star.frequency;
    let response = PhaseResponse::new(f1, p)?;
    let mut capacitances = Vec::with_capacity(theta_star.len());
    let mut clamp_report = Vec::new();
    for (element, target_phase) in theta_star.phases().into_iter().enumerate() {
        let sol = response.invert(target_phase, CAPACITANCE_TOL)?;
        if sol.clamped {
            clamp_report.push(ClampEntry {
                element,
                target_phase,
                achieved_phase: sol.achieved_phase,
                residual: wrap_phase(sol.achieved_phase - target_phase).abs(),
            });
        }
        capacitances.push(sol.capacitance);
    }
    let realized = reflections(&capacitances, f1, p)?;
    Ok(TuningResult {
        theta_star: theta_star.clone(),
        ideal_objective: weighted_sum_power(targets, theta_star, weights)?,
        achieved_objective: weighted_sum_power(targets, &realized, weights)?,
        capacitances,
        clamp_report,
        objective_trace: Vec::new(),
        converged: true,
    })
}

fn reflections(caps: &[f64], f: f64, p: &CircuitParams) -> Result<ScatteringState> {
    let gammas = caps.iter().map(|&c| element_reflection(c, f, p).map(|r| r.gamma)).collect::<Result<Vec<_>>>()?;
    Ok(ScatteringState { gammas, frequency: f })
}

/// The frozen hardware state as seen by a carrier at `f_m`.
pub fn evaluate_off_frequency(result: &TuningResult, f_m: f64, p: &CircuitParams) -> Result<ScatteringState> {
    if !(f_m > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f_m}")));
    }
    reflections(&result.capacitances, f_m, p)
}

/// Full pipeline: optimize ideal phases, optionally quantize, realize capacitances.
pub fn tune(targets: &ChannelSet, weights: &[f64], p: &CircuitParams, opts: &AscentOptions, phase_bits: Option<u32>) -> Result<TuningResult> {
    let ascent = optimize_weighted_sum_power(targets, weights, opts)?;
    let ideal = match phase_bits {
        Some(b) => quantize_phases(&ascent.state, b),
        None => ascent.state,
    };
    let mut result = realize_capacitances(&ideal, p, targets, weights)?;
    result.objective_trace = ascent.trace;
    result.converged = ascent.converged;
    Ok(result)
}

//! Equivalent circuit of a single varactor-tuned reflective element.
//!
//! The element is a bottom-layer inductance `l_bottom` in parallel with a
//! series branch made of the top-layer inductance `l_top`, the varactor
//! capacitance and a loss resistance. The reflection coefficient seen by a
//! normally incident wave is `(Z - z0) / (Z + z0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{wrap_phase, Error, Result, C64};

/// Samples used to unwrap the phase response over the capacitance range.
const UNWRAP_SAMPLES: usize = 512;

/// Circuit constants of one element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Bottom-layer inductance (H).
    pub l_bottom: f64,
    /// Top-layer inductance in series with the varactor (H).
    pub l_top: f64,
    /// Loss resistance (ohm).
    pub r_loss: f64,
    /// Free-space impedance (ohm).
    pub z0: f64,
    /// Smallest varactor capacitance (F).
    pub c_min: f64,
    /// Largest varactor capacitance (F).
    pub c_max: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            l_bottom: 2.5e-9,
            l_top: 0.7e-9,
            r_loss: 1.0,
            z0: 376.73,
            c_min: 0.47e-12,
            c_max: 2.35e-12,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.l_bottom, self.l_top, self.r_loss, self.z0, self.c_min, self.c_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("circuit parameters must be finite".into()));
        }
        if self.l_bottom <= 0.0 || self.l_top <= 0.0 {
            return Err(Error::Domain("inductances must be positive".into()));
        }
        if self.r_loss < 0.0 {
            return Err(Error::Domain("loss resistance must be non-negative".into()));
        }
        if self.z0 <= 0.0 {
            return Err(Error::Domain("free-space impedance must be positive".into()));
        }
        if !(self.c_min > 0.0 && self.c_min < self.c_max) {
            return Err(Error::Domain(format!(
                "capacitance range must satisfy 0 < c_min < c_max, got [{}, {}]",
                self.c_min, self.c_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, c: f64) -> bool {
        c >= self.c_min && c <= self.c_max
    }
}

/// Reflection coefficient of one element at a given state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub gamma: C64,
    pub frequency: f64,
    pub capacitance: f64,
}

impl Reflection {
    pub fn phase(&self) -> f64 {
        self.gamma.arg()
    }
}

fn check_domain(c: f64, f: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("capacitance must be positive, got {c}")));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {f}")));
    }
    Ok(())
}

/// Input impedance of the element circuit.
pub fn element_impedance(c: f64, f: f64, p: &CircuitParams) -> Result<C64> {
    check_domain(c, f)?;
    let omega = 2.0 * PI * f;
    let z_bottom = C64::new(0.0, omega * p.l_bottom);
    let z_series = C64::new(p.r_loss, omega * p.l_top - 1.0 / (omega * c));
    let denom = z_bottom + z_series;
    if denom.norm() == 0.0 {
        // Lossless parallel resonance: the element is an open circuit.
        return Ok(C64::new(f64::INFINITY, 0.0));
    }
    Ok(z_bottom * z_series / denom)
}

/// Reflection coefficient `(Z - z0) / (Z + z0)` of the element.
pub fn element_reflection(c: f64, f: f64, p: &CircuitParams) -> Result<Reflection> {
    let z = element_impedance(c, f, p)?;
    let gamma = if z.re.is_infinite() {
        C64::new(1.0, 0.0)
    } else {
        let denom = z + p.z0;
        if denom.norm() < f64::EPSILON * p.z0 {
            return Err(Error::Numerical(format!(
                "element impedance cancels z0 at c = {c}, f = {f}"
            )));
        }
        (z - p.z0) / denom
    };
    Ok(Reflection {
        gamma,
        frequency: f,
        capacitance: c,
    })
}

/// Outcome of inverting a desired phase to a capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceSolution {
    pub capacitance: f64,
    /// Phase actually produced at the tuning frequency, wrapped to (-pi, pi].
    pub achieved_phase: f64,
    /// Set when the target lies outside the achievable phase span.
    pub clamped: bool,
}

/// Phase response of one element over the capacitance range at a fixed
/// frequency, unwrapped so that inversion can bisect on a continuous curve.
#[derive(Debug, Clone)]
pub struct PhaseResponse {
    params: CircuitParams,
    frequency: f64,
    caps: Vec<f64>,
    unwrapped: Vec<f64>,
}

impl PhaseResponse {
    pub fn new(f: f64, p: &CircuitParams) -> Result<Self> {
        p.validate()?;
        let mut caps = Vec::with_capacity(UNWRAP_SAMPLES + 1);
        let mut unwrapped = Vec::with_capacity(UNWRAP_SAMPLES + 1);
        let mut prev = 0.0;
        for i in 0..=UNWRAP_SAMPLES {
            let c = p.c_min + (p.c_max - p.c_min) * i as f64 / UNWRAP_SAMPLES as f64;
            let phase = element_reflection(c, f, p)?.phase();
            let u = if i == 0 {
                phase
            } else {
                prev + wrap_phase(phase - wrap_phase(prev))
            };
            caps.push(c);
            unwrapped.push(u);
            prev = u;
        }
        Ok(Self {
            params: *p,
            frequency: f,
            caps,
            unwrapped,
        })
    }

    /// Unwrapped phase at `c_min` and `c_max`.
    pub fn endpoints(&self) -> (f64, f64) {
        (self.unwrapped[0], *self.unwrapped.last().unwrap())
    }

    /// Signed achievable phase span (unwrapped phase at `c_max` minus `c_min`).
    pub fn span(&self) -> f64 {
        let (a, b) = self.endpoints();
        b - a
    }

    /// Phase at `c` on the same branch as the sampled curve.
    fn unwrapped_at(&self, c: f64) -> Result<f64> {
        let idx = match self.caps.binary_search_by(|x| x.total_cmp(&c)) {
            Ok(i) => return Ok(self.unwrapped[i]),
            Err(i) => i.saturating_sub(1).min(self.caps.len() - 2),
        };
        let base = self.unwrapped[idx];
        let phase = element_reflection(c, self.frequency, &self.params)?.phase();
        Ok(base + wrap_phase(phase - wrap_phase(base)))
    }

    /// Capacitance whose reflection phase is closest to `phi_target`.
    pub fn invert(&self, phi_target: f64, tol_c: f64) -> Result<CapacitanceSolution> {
        let (lo, hi) = self.endpoints();
        let (ph_min, ph_max) = (lo.min(hi), lo.max(hi));
        // Shift the target onto the unwrapped branch if any 2pi image fits.
        let k = ((ph_min - phi_target) / (2.0 * PI)).ceil();
        let candidate = phi_target + 2.0 * PI * k;
        if candidate <= ph_max {
            let c = self.bisect(candidate, tol_c)?;
            let achieved_phase = element_reflection(c, self.frequency, &self.params)?.phase();
            return Ok(CapacitanceSolution {
                capacitance: c,
                achieved_phase,
                clamped: false,
            });
        }
        let d_lo = wrap_phase(phi_target - lo).abs();
        let d_hi = wrap_phase(phi_target - hi).abs();
        let (capacitance, phase) = if d_lo <= d_hi {
            (self.params.c_min, lo)
        } else {
            (self.params.c_max, hi)
        };
        Ok(CapacitanceSolution {
            capacitance,
            achieved_phase: wrap_phase(phase),
            clamped: true,
        })
    }

    fn bisect(&self, target: f64, tol_c: f64) -> Result<f64> {
        let (mut a, mut b) = (self.params.c_min, self.params.c_max);
        let increasing = self.span() > 0.0;
        for _ in 0..200 {
            if b - a <= tol_c {
                break;
            }
            let mid = 0.5 * (a + b);
            let u = self.unwrapped_at(mid)?;
            if (u < target) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        // Pick whichever bracket end (or midpoint) lands closest.
        let mut best = (f64::INFINITY, a);
        for c in [a, 0.5 * (a + b), b] {
            let err = (self.unwrapped_at(c)? - target).abs();
            if err < best.0 {
                best = (err, c);
            }
        }
        Ok(best.1)
    }
}

/// Default capacitance tolerance of the phase inversion (1e-9 pF).
pub const CAPACITANCE_TOL: f64 = 1e-21;

/// Capacitance in `[c_min, c_max]` minimizing the wrapped phase distance to
/// `phi_target` at frequency `f`. Unreachable targets clamp to a range end.
pub fn phase_to_capacitance(
    phi_target: f64,
    f: f64,
    p: &CircuitParams,
) -> Result<CapacitanceSolution> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f}")));
    }
    PhaseResponse::new(f, p)?.invert(wrap_phase(phi_target), CAPACITANCE_TOL)
}

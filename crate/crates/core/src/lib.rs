//! Multi-band reconfigurable intelligent surface (RIS) simulator.
//!
//! A varactor-tuned reflective surface is configured for target users on one
//! carrier. Because each element's reflection coefficient depends on both the
//! frozen capacitance and the illuminating frequency, the same hardware state
//! scatters signals of other carriers (and other operators) in directions
//! nobody tuned for. This crate models that chain end to end:
//!
//! - [`circuit`]: element impedance and reflection versus capacitance and frequency.
//! - [`array`]: surface geometry, scattering state, re-radiated field and patterns.
//! - [`channels`]: line-of-sight (optionally Rician) channels and the cascaded RIS channel.
//! - [`precoding`]: MRT / ZF precoders and SINR / spectral-efficiency metrics.
//! - [`tuning`]: phase optimization for targets and its capacitance realization.
//! - [`engine`]: scenarios, presets, Monte-Carlo sweeps, bandwidth-of-influence and export.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod channels;
pub mod circuit;
pub mod engine;
pub mod format;
pub mod precoding;
pub mod tuning;

mod error;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Point or direction in metres.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength for a carrier frequency in Hz.
pub fn wavelength(frequency: f64) -> f64 {
    SPEED_OF_LIGHT / frequency
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

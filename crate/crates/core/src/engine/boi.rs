//! Bandwidth of influence.

use crate::{Error, Result};

/// `(f_high - f_low) / f_center`, with the centre defaulting to the interval midpoint.
pub fn fractional_boi(f_low: f64, f_high: f64, f_center: Option<f64>) -> Result<f64> {
    if !(f_low > 0.0 && f_low.is_finite() && f_high.is_finite()) {
        return Err(Error::Domain(format!("band edges must be positive and finite, got [{f_low}, {f_high}]")));
    }
    if f_high < f_low {
        return Err(Error::Domain(format!("f_high ({f_high}) is below f_low ({f_low})")));
    }
    let center = f_center.unwrap_or(0.5 * (f_low + f_high));
    if !(center > 0.0 && center.is_finite()) {
        return Err(Error::Domain(format!("centre frequency must be positive, got {center}")));
    }
    Ok((f_high - f_low) / center)
}

/// Reported measurement of a surface's band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoiEntry {
    pub label: &'static str,
    pub f_low: f64,
    pub f_high: f64,
    /// Explicit centre, when the reported ratio is not midpoint-based.
    pub f_center: Option<f64>,
    /// Reported fractional BoI (percent).
    pub reported_percent: f64,
}

/// Measured unit-cell bands and their reported fractional BoI.
pub const MEASURED_BANDS: [BoiEntry; 4] = [
    BoiEntry {
        label: "1-bit transmissive",
        f_low: 23.9e9,
        f_high: 30.6e9,
        f_center: None,
        reported_percent: 24.5,
    },
    BoiEntry {
        label: "varactor-based reflective",
        f_low: 5.1e9,
        f_high: 6.4e9,
        f_center: None,
        reported_percent: 22.4,
    },
    BoiEntry {
        label: "RF-switch-based transmissive",
        f_low: 5.17e9,
        f_high: 5.44e9,
        f_center: None,
        reported_percent: 5.1,
    },
    BoiEntry {
        label: "PIN-diode-based transmissive",
        f_low: 23.9e9,
        f_high: 30.6e9,
        f_center: None,
        reported_percent: 23.7,
    },
];

/// One 5G NR resource block (12 x 30 kHz) at 1.8 GHz.
pub const FIVE_G_EXAMPLE: BoiEntry = BoiEntry {
    label: "5G resource block at 1.8 GHz",
    f_low: 1.8e9 - 180e3,
    f_high: 1.8e9 + 180e3,
    f_center: Some(1.8e9),
    reported_percent: 0.02,
};

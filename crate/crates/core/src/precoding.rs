//! Linear BS precoders and per-user link metrics.
//!
//! Channels are stacked as `users x antennas`; precoders are `antennas x
//! users` with unit-norm columns and an equal split of the BS power budget.
//! Metrics are always evaluated on the channels the users actually see,
//! which may differ from the ones the precoder was designed on.

use serde::{Deserialize, Serialize};

use crate::channels::CMatrix;
use crate::{Error, Result, C64};

/// Singular-value ratio below which a channel stack is treated as rank deficient.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeResult {
    /// `antennas x users`, unit-norm columns.
    pub precoder: CMatrix,
    /// Per-stream transmit power (W).
    pub powers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub sinr: Vec<f64>,
    /// `log2(1 + sinr)` per user (b/s/Hz).
    pub se: Vec<f64>,
    pub sum_se: f64,
}

fn check_users(h: &CMatrix) -> Result<()> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::Contract("precoding needs at least one user and one antenna".into()));
    }
    for u in 0..h.nrows() {
        if h.row(u).iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Err(Error::DegenerateChannel(u));
        }
    }
    Ok(())
}

fn equal_split(total_power: f64, users: usize) -> Result<Vec<f64>> {
    if !(total_power >= 0.0) {
        return Err(Error::Contract(format!("negative power budget {total_power}")));
    }
    Ok(vec![total_power / users as f64; users])
}

/// Matched filter: column `u` is `conj(h_u) / |h_u|`.
pub fn mrt_precoder(h: &CMatrix, total_power: f64) -> Result<PrecodeResult> {
    check_users(h)?;
    let mut w = h.adjoint();
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    Ok(PrecodeResult {
        precoder: w,
        powers: equal_split(total_power, h.nrows())?,
    })
}

/// Ratio of largest to smallest singular value of the stacked channel.
pub fn condition_number(h: &CMatrix) -> f64 {
    let sv = h.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Pair of users with the largest normalized channel correlation.
pub fn most_correlated_pair(h: &CMatrix) -> Option<(usize, usize, f64)> {
    let k = h.nrows();
    let mut best: Option<(usize, usize, f64)> = None;
    for a in 0..k {
        for b in a + 1..k {
            let (ra, rb) = (h.row(a), h.row(b));
            let denom = ra.norm() * rb.norm();
            let rho = if denom > 0.0 {
                ra.dotc(&rb).norm() / denom
            } else {
                1.0
            };
            if best.is_none_or(|(_, _, r)| rho > r) {
                best = Some((a, b, rho));
            }
        }
    }
    best
}

/// Zero-forcing: normalized columns of the pseudo-inverse `H^H (H H^H)^-1`.
pub fn zf_precoder(h: &CMatrix, total_power: f64) -> Result<PrecodeResult> {
    check_users(h)?;
    let (k, m) = h.shape();
    if k > m {
        return Err(Error::Contract(format!("zero forcing needs users ({k}) <= antennas ({m})")));
    }
    let cond = condition_number(h);
    if !(cond.is_finite() && 1.0 / cond > RANK_TOL) {
        let (first, second, _) = most_correlated_pair(h).unwrap_or((0, 0, 1.0));
        return Err(Error::RankDeficient {
            first,
            second,
            condition: cond,
        });
    }
    let gram = h * h.adjoint();
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Gram matrix not invertible".into()))?;
    let mut w = h.adjoint() * inv;
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    Ok(PrecodeResult {
        precoder: w,
        powers: equal_split(total_power, k)?,
    })
}

/// Per-user SNR loss of zero forcing relative to the matched filter,
/// `|h_u|^2 / |h_u w_u|^2` (>= 1).
pub fn zf_power_penalty(h: &CMatrix, zf: &PrecodeResult) -> Vec<f64> {
    (0..h.nrows())
        .map(|u| {
            let gain = (h.row(u) * zf.precoder.column(u))[(0, 0)].norm_sqr();
            h.row(u).norm_squared() / gain
        })
        .collect()
}

/// SINR and spectral efficiency on the `actual` channels:
/// `P_u |h_u w_u|^2 / (sum_{v != u} P_v |h_u w_v|^2 + ext_u + noise)`.
pub fn link_metrics(actual: &CMatrix, precoders: &PrecodeResult, noise_power: f64, external_interference: &[f64]) -> Result<LinkMetrics> {
    let (k, m) = actual.shape();
    if precoders.precoder.shape() != (m, k) || precoders.powers.len() != k {
        return Err(Error::Contract(format!(
            "channels {k}x{m} do not match precoder {:?} with {} powers",
            precoders.precoder.shape(),
            precoders.powers.len()
        )));
    }
    if !external_interference.is_empty() && external_interference.len() != k {
        return Err(Error::Contract("external interference must list one value per user".into()));
    }
    if precoders.powers.iter().any(|p| !(*p >= 0.0)) || !(noise_power >= 0.0) || external_interference.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::Contract("powers must be non-negative".into()));
    }
    let gains = actual * &precoders.precoder;
    let mut sinr = Vec::with_capacity(k);
    for u in 0..k {
        let signal = precoders.powers[u] * gains[(u, u)].norm_sqr();
        let interference: f64 = (0..k).filter(|&v| v != u).map(|v| precoders.powers[v] * gains[(u, v)].norm_sqr()).sum();
        let ext = external_interference.get(u).copied().unwrap_or(0.0);
        let denom = interference + ext + noise_power;
        sinr.push(if denom > 0.0 { signal / denom } else { f64::INFINITY });
    }
    let se: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let sum_se = se.iter().sum();
    Ok(LinkMetrics { sinr, se, sum_se })
}

/// Thermal noise power (W) for a density in dBm/Hz, noise figure and bandwidth.
pub fn noise_power_w(density_dbm_hz: f64, noise_figure_db: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_w(density_dbm_hz + noise_figure_db + 10.0 * bandwidth_hz.log10())
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

//! Line-of-sight channel synthesis and the cascaded surface channel.
//!
//! All matrices are receive x transmit: the direct channel is
//! `UEs x BS antennas`, the illumination is `elements x BS antennas` and the
//! re-radiation is `UEs x elements`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::ScatteringState;
use crate::{wavelength, Error, Result, Vec3, C64};

pub type CMatrix = DMatrix<C64>;

/// Free-space amplitude gain `lambda / (4 pi d)`.
pub fn freespace_pathloss(d: f64, f: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f}")));
    }
    Ok(wavelength(f) / (4.0 * PI * d))
}

/// A transmitter or receiver with a uniform linear antenna array.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub position: Vec3,
    pub antennas: usize,
    /// Antenna spacing (m).
    pub spacing: f64,
    /// Unit vector along the array axis.
    pub axis: Vec3,
}

impl Node {
    pub fn single(position: Vec3) -> Self {
        Self {
            position,
            antennas: 1,
            spacing: 0.0,
            axis: Vec3::x(),
        }
    }

    /// Horizontal ULA of `antennas` elements whose axis points at `axis_azimuth_deg`.
    pub fn ula(position: Vec3, antennas: usize, spacing: f64, axis_azimuth_deg: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Domain("a node needs at least one antenna".into()));
        }
        let a = axis_azimuth_deg.to_radians();
        Ok(Self {
            position,
            antennas,
            spacing,
            axis: Vec3::new(a.cos(), a.sin(), 0.0),
        })
    }

    /// Antenna positions, centred on the node position.
    pub fn antenna_positions(&self) -> Vec<Vec3> {
        let mid = (self.antennas as f64 - 1.0) / 2.0;
        (0..self.antennas)
            .map(|i| self.position + self.axis * ((i as f64 - mid) * self.spacing))
            .collect()
    }
}

/// Small-scale fading applied on top of the deterministic LoS term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Fading {
    #[default]
    PureLos,
    /// Rician mixing with K-factor in dB; the scattered part has the
    /// same average power as the LoS entry it perturbs.
    Rician {
        #[serde(default = "default_k_db")]
        k_db: f64,
    },
}

fn default_k_db() -> f64 {
    10.0
}

/// Channel matrix `rx x tx` with exact spherical-wave LoS entries
/// `pathloss(d) * exp(-j 2 pi d / lambda)` and optional seeded Rician scatter.
pub fn los_channel(tx: &[Vec3], rx: &[Vec3], f: f64, fading: Fading, seed: u64) -> Result<CMatrix> {
    let lambda = wavelength(f);
    let mut los = CMatrix::zeros(rx.len(), tx.len());
    for (i, r) in rx.iter().enumerate() {
        for (j, t) in tx.iter().enumerate() {
            let d = (r - t).norm();
            if d == 0.0 {
                return Err(Error::Domain(format!("transmitter and receiver coincide at {r:?}")));
            }
            let amp = freespace_pathloss(d, f)?;
            los[(i, j)] = C64::from_polar(amp, -2.0 * PI * d / lambda);
        }
    }
    match fading {
        Fading::PureLos => Ok(los),
        Fading::Rician { k_db } => {
            let k = 10f64.powf(k_db / 10.0);
            let (a_los, a_nlos) = ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            // Row-major draw order keeps the first rows identical when rows are appended.
            let mut out = CMatrix::zeros(rx.len(), tx.len());
            for i in 0..rx.len() {
                for j in 0..tx.len() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    let g = C64::new(re, im) * scale * los[(i, j)].norm();
                    out[(i, j)] = los[(i, j)] * a_los + g * a_nlos;
                }
            }
            Ok(out)
        }
    }
}

/// Node-to-node convenience wrapper around [`los_channel`].
pub fn node_channel(tx: &Node, rx: &Node, f: f64, fading: Fading, seed: u64) -> Result<CMatrix> {
    los_channel(&tx.antenna_positions(), &rx.antenna_positions(), f, fading, seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and a path of
/// indices (e.g. link kind, UE index, realization index). The mapping is
/// fixed so that scheduling never changes which stream a case draws from.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |h, &x| splitmix64(h ^ splitmix64(x)))
}

/// Every link needed to form the effective channel of a group of UEs at one carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS -> UE, `UEs x antennas`.
    pub direct: CMatrix,
    /// BS -> elements, `elements x antennas`.
    pub bs_to_ris: CMatrix,
    /// Elements -> UE, `UEs x elements`.
    pub ris_to_ue: CMatrix,
    pub frequency: f64,
    /// Per-UE direct-path blockage.
    pub blocked: Vec<bool>,
}

impl ChannelSet {
    pub fn new(direct: CMatrix, bs_to_ris: CMatrix, ris_to_ue: CMatrix, frequency: f64, blocked: Vec<bool>) -> Result<Self> {
        let set = Self {
            direct,
            bs_to_ris,
            ris_to_ue,
            frequency,
            blocked,
        };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<()> {
        let (k, m) = self.direct.shape();
        let (n, m2) = self.bs_to_ris.shape();
        let (k2, n2) = self.ris_to_ue.shape();
        if m != m2 || k != k2 || n != n2 || self.blocked.len() != k {
            return Err(Error::Contract(format!(
                "inconsistent channel dimensions: direct {k}x{m}, bs_to_ris {n}x{m2}, ris_to_ue {k2}x{n2}, {} blockage flags",
                self.blocked.len()
            )));
        }
        let finite = self.direct.iter().chain(self.bs_to_ris.iter()).chain(self.ris_to_ue.iter()).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::Numerical("non-finite channel entry".into()));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.direct.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.direct.ncols()
    }

    pub fn elements(&self) -> usize {
        self.bs_to_ris.nrows()
    }

    /// Direct channel with blocked rows zeroed.
    pub fn direct_unblocked(&self) -> CMatrix {
        let mut d = self.direct.clone();
        for (u, &b) in self.blocked.iter().enumerate() {
            if b {
                d.row_mut(u).fill(C64::new(0.0, 0.0));
            }
        }
        d
    }

    /// Subset of UEs (rows) sharing the same surface links.
    pub fn select(&self, users: &[usize]) -> ChannelSet {
        ChannelSet {
            direct: self.direct.select_rows(users),
            bs_to_ris: self.bs_to_ris.clone(),
            ris_to_ue: self.ris_to_ue.select_rows(users),
            frequency: self.frequency,
            blocked: users.iter().map(|&u| self.blocked[u]).collect(),
        }
    }

    /// Per-element cascade rows of UE `u`: row `n` is `ris_to_ue[u, n] * bs_to_ris[n, :]`.
    pub fn cascade_rows(&self, u: usize) -> CMatrix {
        let mut c = self.bs_to_ris.clone();
        for n in 0..self.elements() {
            let s = self.ris_to_ue[(u, n)];
            for x in c.row_mut(n).iter_mut() {
                *x *= s;
            }
        }
        c
    }

    /// Surface-only channel `ris_to_ue * diag(state) * bs_to_ris`.
    pub fn cascaded(&self, state: &ScatteringState) -> Result<CMatrix> {
        if state.frequency != self.frequency {
            return Err(Error::Contract(format!(
                "scattering state at {} Hz applied to channels at {} Hz",
                state.frequency, self.frequency
            )));
        }
        if state.len() != self.elements() {
            return Err(Error::Contract(format!(
                "scattering state has {} entries for {} elements",
                state.len(),
                self.elements()
            )));
        }
        let mut weighted = self.ris_to_ue.clone();
        for (n, g) in state.gammas.iter().enumerate() {
            for x in weighted.column_mut(n).iter_mut() {
                *x *= g;
            }
        }
        Ok(weighted * &self.bs_to_ris)
    }
}

/// Effective channel `direct + ris_to_ue * diag(gamma) * bs_to_ris`, with
/// blocked direct rows removed.
pub fn effective_channel(chs: &ChannelSet, state: &ScatteringState) -> Result<CMatrix> {
    Ok(chs.direct_unblocked() + chs.cascaded(state)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn db(x: f64) -> f64 {
        10.0 * x.log10()
    }

    #[test]
    fn pathloss_values() {
        let g1 = freespace_pathloss(1.0, 2.5e9).unwrap();
        // lambda = 0.119916983 m; (lambda / 4 pi)^2 -> -40.4066 dB.
        assert_relative_eq!(db(g1 * g1), -40.406_583_395, epsilon = 1e-8);
        let g2 = freespace_pathloss(2.0, 2.5e9).unwrap();
        assert_relative_eq!(db((g2 / g1).powi(2)), -6.020_599_913, epsilon = 1e-9);
        let g3 = freespace_pathloss(1.0, 5e9).unwrap();
        assert_relative_eq!(db((g3 / g1).powi(2)), -6.020_599_913, epsilon = 1e-9);
        assert!(freespace_pathloss(0.0, 1e9).is_err());
    }

    #[test]
    fn single_antenna_entry_magnitude() {
        let tx = [Vec3::new(0.0, 0.0, 0.0)];
        let rx = [Vec3::new(3.0, 4.0, 0.0)];
        let h = los_channel(&tx, &rx, 2.5e9, Fading::PureLos, 0).unwrap();
        assert_relative_eq!(h[(0, 0)].norm(), freespace_pathloss(5.0, 2.5e9).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn coincident_nodes_rejected() {
        let p = [Vec3::new(1.0, 1.0, 1.0)];
        assert!(matches!(los_channel(&p, &p, 1e9, Fading::PureLos, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn rician_limit_and_determinism() {
        let bs = Node::ula(Vec3::new(0.0, 0.0, 10.0), 8, 0.06, 0.0).unwrap();
        let ue = Node::single(Vec3::new(30.0, 20.0, 1.5));
        let los = node_channel(&bs, &ue, 2.5e9, Fading::PureLos, 7).unwrap();
        let near = node_channel(&bs, &ue, 2.5e9, Fading::Rician { k_db: 160.0 }, 7).unwrap();
        let diff = (&los - &near).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
        let a = node_channel(&bs, &ue, 2.5e9, Fading::Rician { k_db: 10.0 }, 42).unwrap();
        let b = node_channel(&bs, &ue, 2.5e9, Fading::Rician { k_db: 10.0 }, 42).unwrap();
        let c = node_channel(&bs, &ue, 2.5e9, Fading::Rician { k_db: 10.0 }, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn los_reciprocity() {
        let a = Node::ula(Vec3::new(0.0, 0.0, 0.0), 4, 0.05, 30.0).unwrap();
        let b = Node::ula(Vec3::new(10.0, -3.0, 2.0), 3, 0.05, 100.0).unwrap();
        let ab = node_channel(&a, &b, 3e9, Fading::PureLos, 0).unwrap();
        let ba = node_channel(&b, &a, 3e9, Fading::PureLos, 0).unwrap();
        assert_eq!(ab.transpose(), ba);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }

    fn toy_set() -> ChannelSet {
        let bs = Node::ula(Vec3::new(20.0, -20.0, 5.0), 2, 0.06, 0.0).unwrap();
        let elems = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.06, 0.0, 0.0), Vec3::new(0.12, 0.0, 0.0)];
        let ues = vec![Vec3::new(3.0, 4.0, 0.0), Vec3::new(-2.0, 6.0, 1.0)];
        let f = 2.5e9;
        ChannelSet::new(
            los_channel(&bs.antenna_positions(), &ues, f, Fading::PureLos, 0).unwrap(),
            los_channel(&bs.antenna_positions(), &elems, f, Fading::PureLos, 0).unwrap(),
            los_channel(&elems, &ues, f, Fading::PureLos, 0).unwrap(),
            f,
            vec![false, false],
        )
        .unwrap()
    }

    #[test]
    fn zero_gammas_leave_direct() {
        let chs = toy_set();
        let h = effective_channel(&chs, &ScatteringState::zeros(3, chs.frequency)).unwrap();
        assert_eq!(h, chs.direct);
    }

    #[test]
    fn blocked_single_element_is_product() {
        let f = 2.5e9;
        let chs = ChannelSet::new(
            CMatrix::from_element(1, 1, C64::new(0.3, 0.1)),
            CMatrix::from_element(1, 1, C64::new(0.2, -0.5)),
            CMatrix::from_element(1, 1, C64::new(-0.7, 0.4)),
            f,
            vec![true],
        )
        .unwrap();
        let g = C64::from_polar(0.9, 1.1);
        let h = effective_channel(&chs, &ScatteringState::new(vec![g], f).unwrap()).unwrap();
        assert_eq!(h[(0, 0)], C64::new(-0.7, 0.4) * g * C64::new(0.2, -0.5));
    }

    #[test]
    fn frequency_mismatch_rejected() {
        let chs = toy_set();
        let err = effective_channel(&chs, &ScatteringState::zeros(3, 2.6e9)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn cascade_rows_sum_to_cascade() {
        let chs = toy_set();
        let state = ScatteringState::from_phases(&[0.3, -1.0, 2.0], chs.frequency);
        let h = chs.cascaded(&state).unwrap();
        for u in 0..2 {
            let rows = chs.cascade_rows(u);
            for m in 0..2 {
                let s: C64 = (0..3).map(|n| rows[(n, m)] * state.gammas[n]).sum();
                assert_relative_eq!(s.re, h[(u, m)].re, max_relative = 1e-12);
                assert_relative_eq!(s.im, h[(u, m)].im, max_relative = 1e-12);
            }
        }
    }
}

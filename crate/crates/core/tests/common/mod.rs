//! Random instances shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risim::array::{build_array, reflected_field, ElementPattern, Observation, Placement, ScatteringState, Wave};
use risim::channels::{effective_channel, los_channel, CMatrix, ChannelSet, Fading, Node};
use risim::{Vec3, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point(rng: &mut ChaCha8Rng, lo: [f64; 3], hi: [f64; 3]) -> Vec3 {
    Vec3::new(rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1]), rng.random_range(lo[2]..hi[2]))
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cgauss(rng))
}

/// Geometric channel set in front of a small surface at 2.5 GHz.
pub fn random_channels(rng: &mut ChaCha8Rng, users: usize, antennas: usize, rows: usize, cols: usize, blocked: bool) -> ChannelSet {
    let f = 2.5e9;
    let array = build_array(rows, cols, f, 0.5).unwrap();
    let bs = Node::ula(point(rng, [-40.0, 10.0, 5.0], [40.0, 60.0, 20.0]), antennas, 0.06, rng.random_range(0.0..180.0)).unwrap();
    let ues: Vec<Vec3> = (0..users).map(|_| point(rng, [-20.0, 2.0, 0.0], [20.0, 30.0, 2.0])).collect();
    let bs_pos = bs.antenna_positions();
    let seed = rng.random();
    let fading = Fading::Rician { k_db: 5.0 };
    ChannelSet::new(
        los_channel(&bs_pos, &ues, f, fading, seed).unwrap(),
        los_channel(&bs_pos, &array.positions, f, fading, seed ^ 1).unwrap(),
        los_channel(&array.positions, &ues, f, fading, seed ^ 2).unwrap(),
        f,
        vec![blocked; users],
    )
    .unwrap()
}

pub fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

const LIGHT: f64 = 299_792_458.0;

/// Reflected field by plain re/im arithmetic, one element at a time.
#[allow(clippy::too_many_arguments)]
pub fn brute_field(
    pos: &[[f64; 3]],
    gammas: &[(f64, f64)],
    f: f64,
    source: Result<[f64; 3], [f64; 3]>,
    observer: Result<[f64; 3], [f64; 3]>,
    cosine_normal: Option<[f64; 3]>,
) -> (f64, f64) {
    let k = 2.0 * std::f64::consts::PI * f / LIGHT;
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let (mut re, mut im) = (0.0, 0.0);
    for (r, &(gr, gi)) in pos.iter().zip(gammas) {
        let (amp_in, ph_in, back) = match source {
            Ok(s) => {
                let d = sub(s, *r);
                let dist = dot(d, d).sqrt();
                (1.0 / dist, -k * dist, [d[0] / dist, d[1] / dist, d[2] / dist])
            }
            Err(u) => {
                let n = dot(u, u).sqrt();
                let u = [u[0] / n, u[1] / n, u[2] / n];
                (1.0, -k * dot(u, *r), [-u[0], -u[1], -u[2]])
            }
        };
        let (amp_out, ph_out, out) = match observer {
            Ok(o) => {
                let d = sub(o, *r);
                let dist = dot(d, d).sqrt();
                (1.0 / dist, -k * dist, [d[0] / dist, d[1] / dist, d[2] / dist])
            }
            Err(u) => {
                let n = dot(u, u).sqrt();
                let u = [u[0] / n, u[1] / n, u[2] / n];
                (1.0, k * dot(u, *r), u)
            }
        };
        let ef = match cosine_normal {
            Some(nrm) => dot(back, nrm).abs() * dot(out, nrm).abs(),
            None => 1.0,
        };
        let a = amp_in * amp_out * ef;
        let ph = ph_in + ph_out;
        let (cr, ci) = (a * ph.cos(), a * ph.sin());
        re += cr * gr - ci * gi;
        im += cr * gi + ci * gr;
    }
    (re, im)
}

/// Effective channel as an explicit triple loop.
pub fn brute_effective(chs: &ChannelSet, gammas: &[C64]) -> Vec<Vec<C64>> {
    let (k, m, n) = (chs.users(), chs.antennas(), chs.elements());
    let mut out = vec![vec![C64::new(0.0, 0.0); m]; k];
    for u in 0..k {
        for a in 0..m {
            let mut acc = if chs.blocked[u] { C64::new(0.0, 0.0) } else { chs.direct[(u, a)] };
            for e in 0..n {
                acc += chs.ris_to_ue[(u, e)] * gammas[e] * chs.bs_to_ris[(e, a)];
            }
            out[u][a] = acc;
        }
    }
    out
}

/// Relative error of `reflected_field` against [`brute_field`] on one random
/// instance. Varies source and observer kinds and the element pattern with `case`.
pub fn field_oracle_error(rng: &mut ChaCha8Rng, case: usize) -> f64 {
    let f = rng.random_range(1e9..6e9);
    let rows = rng.random_range(1..9);
    let cols = rng.random_range(1..9);
    let placement = Placement {
        center: point(rng, [-5.0, -5.0, 0.0], [5.0, 5.0, 5.0]).into(),
        normal_azimuth_deg: rng.random_range(0.0..360.0),
    };
    let pattern = if case.is_multiple_of(3) { ElementPattern::Cosine } else { ElementPattern::Isotropic };
    let array = build_array(rows, cols, f, rng.random_range(0.2..0.8)).unwrap().with_placement(placement).with_element_pattern(pattern);
    let gammas: Vec<C64> = (0..array.len()).map(|_| C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2))).collect();
    let state = ScatteringState::new(gammas.clone(), f).unwrap();
    let src = point(rng, [-50.0, -50.0, 0.0], [50.0, 50.0, 30.0]);
    let obs = point(rng, [-30.0, -30.0, 0.0], [30.0, 30.0, 10.0]) + Vec3::new(0.0, 0.0, 12.0);
    let (wave, source) = if case.is_multiple_of(2) { (Wave::point(src, f), Ok(src.into())) } else { (Wave::plane(src, f), Err(src.into())) };
    let (observation, observer) = if case % 4 < 2 {
        (Observation::Point(obs), Ok(obs.into()))
    } else {
        (Observation::Direction(obs), Err(obs.into()))
    };
    let got = reflected_field(&array, &state, &wave, &observation).unwrap();
    let pos: Vec<[f64; 3]> = array.positions.iter().map(|p| (*p).into()).collect();
    let g: Vec<(f64, f64)> = gammas.iter().map(|z| (z.re, z.im)).collect();
    let normal = (pattern == ElementPattern::Cosine).then(|| placement.normal().into());
    let (re, im) = brute_field(&pos, &g, f, source, observer, normal);
    let want = C64::new(re, im);
    (got - want).norm() / want.norm()
}

/// Worst entry-wise relative error of `effective_channel` against
/// [`brute_effective`] on one random instance with mixed blockage.
pub fn effective_oracle_error(rng: &mut ChaCha8Rng) -> f64 {
    let users = rng.random_range(1..5);
    let antennas = rng.random_range(1..6);
    let (rows, cols) = (rng.random_range(1..6), rng.random_range(1..6));
    let mut chs = random_channels(rng, users, antennas, rows, cols, false);
    chs.blocked = (0..users).map(|_| rng.random_bool(0.3)).collect();
    let gammas: Vec<C64> = (0..chs.elements()).map(|_| C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2))).collect();
    let state = ScatteringState::new(gammas.clone(), chs.frequency).unwrap();
    let got = effective_channel(&chs, &state).unwrap();
    let want = brute_effective(&chs, &gammas);
    let mut worst: f64 = 0.0;
    for u in 0..users {
        for a in 0..antennas {
            worst = worst.max((got[(u, a)] - want[u][a]).norm() / want[u][a].norm());
        }
    }
    worst
}

//! Surface geometry, scattering state and re-radiated field.
//!
//! Elements are isotropic scalar point scatterers (optionally weighted by a
//! cosine element factor). Point sources and point observers use exact
//! per-element distances, so near-field focusing is reproduced.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{element_reflection, CircuitParams};
use crate::format::sig9;
use crate::{wavelength, Error, Result, Vec3, C64};

/// Distance below which an observer is considered to sit on an element (m).
const COINCIDENCE_TOL: f64 = 1e-9;

/// Orientation and position of a vertical surface.
///
/// The surface normal lies in the horizontal plane at `normal_azimuth_deg`
/// (counter-clockwise from +x). The in-plane horizontal axis is the normal
/// rotated by -90 degrees; the in-plane vertical axis is +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub center: [f64; 3],
    #[serde(default = "Placement::default_azimuth")]
    pub normal_azimuth_deg: f64,
}

impl Default for Placement {
    /// Centered at the origin on the xz-plane, facing +y.
    fn default() -> Self {
        Self {
            center: [0.0; 3],
            normal_azimuth_deg: Self::default_azimuth(),
        }
    }
}

impl Placement {
    fn default_azimuth() -> f64 {
        90.0
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn normal(&self) -> Vec3 {
        let a = self.normal_azimuth_deg.to_radians();
        Vec3::new(a.cos(), a.sin(), 0.0)
    }

    /// In-plane horizontal axis; positive pattern angles rotate toward it.
    pub fn horizontal(&self) -> Vec3 {
        let a = self.normal_azimuth_deg.to_radians();
        Vec3::new(a.sin(), -a.cos(), 0.0)
    }

    pub fn vertical(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0)
    }

    /// Unit direction at azimuth `angle_deg` from broadside and elevation
    /// `elevation_deg` above the horizontal plane.
    pub fn direction(&self, angle_deg: f64, elevation_deg: f64) -> Vec3 {
        let (t, e) = (angle_deg.to_radians(), elevation_deg.to_radians());
        (self.normal() * t.cos() + self.horizontal() * t.sin()) * e.cos() + self.vertical() * e.sin()
    }

    /// Azimuth from broadside of a point, in degrees.
    pub fn angle_of(&self, point: Vec3) -> f64 {
        let d = point - self.center();
        d.dot(&self.horizontal()).atan2(d.dot(&self.normal())).to_degrees()
    }
}

/// Radiation pattern of a single element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// `|cos|` of the angle to the surface normal, applied on both hops.
    Cosine,
}

/// The physical surface: a uniform rows x cols grid and its capacitance state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisArray {
    pub rows: usize,
    pub cols: usize,
    /// Inter-element spacing (m).
    pub spacing: f64,
    pub placement: Placement,
    pub element_pattern: ElementPattern,
    /// Element centres, row-major (row index along +z, column along the horizontal axis).
    pub positions: Vec<Vec3>,
    /// Per-element varactor capacitance (F); empty until tuned.
    pub capacitances: Vec<f64>,
}

/// Grid of `rows x cols` elements spaced `spacing_fraction` wavelengths at
/// `f_design`, centred at the origin on the xz-plane.
pub fn build_array(rows: usize, cols: usize, f_design: f64, spacing_fraction: f64) -> Result<RisArray> {
    if rows == 0 || cols == 0 {
        return Err(Error::Domain("array needs at least one row and one column".into()));
    }
    if !(spacing_fraction > 0.0) || !(f_design > 0.0) {
        return Err(Error::Domain(
            "spacing fraction and design frequency must be positive".into(),
        ));
    }
    let spacing = spacing_fraction * wavelength(f_design);
    let mut array = RisArray {
        rows,
        cols,
        spacing,
        placement: Placement::default(),
        element_pattern: ElementPattern::default(),
        positions: Vec::new(),
        capacitances: Vec::new(),
    };
    array.layout();
    Ok(array)
}

impl RisArray {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Move the surface; positions are recomputed and capacitances kept.
    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self.layout();
        self
    }

    pub fn with_element_pattern(mut self, pattern: ElementPattern) -> Self {
        self.element_pattern = pattern;
        self
    }

    fn layout(&mut self) {
        let (c, h, v) = (
            self.placement.center(),
            self.placement.horizontal(),
            self.placement.vertical(),
        );
        let row_mid = (self.rows as f64 - 1.0) / 2.0;
        let col_mid = (self.cols as f64 - 1.0) / 2.0;
        self.positions = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |k| (r, k)))
            .map(|(r, k)| {
                c + h * ((k as f64 - col_mid) * self.spacing) + v * ((r as f64 - row_mid) * self.spacing)
            })
            .collect();
    }

    /// Set the hardware state, checking range and length.
    pub fn set_capacitances(&mut self, caps: Vec<f64>, p: &CircuitParams) -> Result<()> {
        if caps.len() != self.len() {
            return Err(Error::Contract(format!(
                "expected {} capacitances, got {}",
                self.len(),
                caps.len()
            )));
        }
        if let Some((i, c)) = caps.iter().enumerate().find(|(_, c)| !p.contains(**c)) {
            return Err(Error::Domain(format!(
                "capacitance {c} of element {i} outside [{}, {}]",
                p.c_min, p.c_max
            )));
        }
        self.capacitances = caps;
        Ok(())
    }

    /// Distance between the outermost element centres along the horizontal axis (m).
    pub fn aperture_edge(&self) -> f64 {
        (self.cols as f64 - 1.0) * self.spacing
    }

    fn element_factor(&self, dir: &Vec3) -> f64 {
        match self.element_pattern {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::Cosine => dir.dot(&self.placement.normal()).abs(),
        }
    }
}

/// Diagonal scattering matrix evaluated at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringState {
    pub gammas: Vec<C64>,
    pub frequency: f64,
}

impl ScatteringState {
    /// Wrap explicit reflection coefficients; each must satisfy `|gamma| <= 1`.
    pub fn new(gammas: Vec<C64>, frequency: f64) -> Result<Self> {
        if let Some((i, g)) = gammas
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.norm() <= 1.0 + 1e-12))
        {
            return Err(Error::Domain(format!("|gamma| = {} > 1 at element {i}", g.norm())));
        }
        Ok(Self { gammas, frequency })
    }

    /// Unit-magnitude entries with the given phases.
    pub fn from_phases(phases: &[f64], frequency: f64) -> Self {
        Self {
            gammas: phases.iter().map(|&p| C64::from_polar(1.0, p)).collect(),
            frequency,
        }
    }

    pub fn zeros(n: usize, frequency: f64) -> Self {
        Self {
            gammas: vec![C64::new(0.0, 0.0); n],
            frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.gammas.iter().map(|g| g.arg()).collect()
    }
}

/// Per-element reflection of the array's frozen capacitances at `f`.
pub fn scattering_state(array: &RisArray, f: f64, p: &CircuitParams) -> Result<ScatteringState> {
    if array.capacitances.len() != array.len() {
        return Err(Error::Contract("array capacitances are not set".into()));
    }
    let gammas = array
        .capacitances
        .iter()
        .map(|&c| element_reflection(c, f, p).map(|r| r.gamma))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringState {
        gammas,
        frequency: f,
    })
}

/// Geometry of an illuminating wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveSource {
    /// Spherical wave from a point (m).
    Point([f64; 3]),
    /// Plane wave travelling along a unit direction.
    Plane([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub source: WaveSource,
    pub frequency: f64,
    pub amplitude: f64,
}

impl Wave {
    pub fn point(pos: Vec3, frequency: f64) -> Self {
        Self {
            source: WaveSource::Point(pos.into()),
            frequency,
            amplitude: 1.0,
        }
    }

    pub fn plane(direction: Vec3, frequency: f64) -> Self {
        Self {
            source: WaveSource::Plane(direction.normalize().into()),
            frequency,
            amplitude: 1.0,
        }
    }

    /// Complex incident amplitude at `r` and the unit vector pointing back toward the source.
    fn at(&self, r: &Vec3) -> (C64, Vec3) {
        let k = 2.0 * PI / wavelength(self.frequency);
        match self.source {
            WaveSource::Point(s) => {
                let d = Vec3::from(s) - r;
                let dist = d.norm();
                (C64::from_polar(self.amplitude / dist, -k * dist), d / dist)
            }
            WaveSource::Plane(dir) => {
                let dir = Vec3::from(dir);
                (C64::from_polar(self.amplitude, -k * dir.dot(r)), -dir)
            }
        }
    }
}

/// Where the re-radiated field is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    /// A point in space; spherical spreading `1/d` applies.
    Point(Vec3),
    /// A far-field unit direction; phase referenced to the origin, no spreading.
    Direction(Vec3),
}

/// Coherent sum over elements of incident field x gamma x propagation to the observer.
pub fn reflected_field(
    array: &RisArray,
    state: &ScatteringState,
    incident: &Wave,
    observation: &Observation,
) -> Result<C64> {
    if state.len() != array.len() {
        return Err(Error::Contract(format!(
            "scattering state has {} entries for {} elements",
            state.len(),
            array.len()
        )));
    }
    if state.frequency != incident.frequency {
        return Err(Error::Contract(format!(
            "state evaluated at {} Hz but wave is at {} Hz",
            state.frequency, incident.frequency
        )));
    }
    let k = 2.0 * PI / wavelength(incident.frequency);
    let mut total = C64::new(0.0, 0.0);
    for (r, gamma) in array.positions.iter().zip(&state.gammas) {
        let (inc, back) = incident.at(r);
        let (out, dir) = match observation {
            Observation::Point(o) => {
                let d = o - r;
                let dist = d.norm();
                if dist < COINCIDENCE_TOL {
                    return Err(Error::Domain(format!(
                        "observation point coincides with element at {r:?}"
                    )));
                }
                (C64::from_polar(1.0 / dist, -k * dist), d / dist)
            }
            Observation::Direction(u) => {
                let u = u.normalize();
                (C64::from_polar(1.0, k * u.dot(r)), u)
            }
        };
        let ef = array.element_factor(&back) * array.element_factor(&dir);
        total += inc * gamma * out * ef;
    }
    Ok(total)
}

/// Horizontal (azimuth) cut through the surface centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternCut {
    /// Elevation of the cut plane above the horizontal (degrees).
    #[serde(default)]
    pub elevation_deg: f64,
    /// Observation radius from the surface centre (m); `None` for far-field directions.
    #[serde(default)]
    pub radius: Option<f64>,
}

impl Default for PatternCut {
    fn default() -> Self {
        Self {
            elevation_deg: 0.0,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSample {
    pub angle_deg: f64,
    pub power_db: f64,
}

/// Uniform angle grid over `[start, stop]` inclusive.
pub fn angle_grid(start_deg: f64, stop_deg: f64, step_deg: f64) -> Vec<f64> {
    let n = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize;
    (0..=n).map(|i| start_deg + step_deg * i as f64).collect()
}

/// Default grid: 0.25 degree steps over [-90, 90].
pub fn default_angle_grid() -> Vec<f64> {
    angle_grid(-90.0, 90.0, 0.25)
}

/// Raw `|field|^2` over the cut, in grid order.
pub fn pattern_power(
    array: &RisArray,
    state: &ScatteringState,
    incident: &Wave,
    angles_deg: &[f64],
    cut: &PatternCut,
) -> Result<Vec<f64>> {
    let center = array.placement.center();
    angles_deg
        .par_iter()
        .map(|&a| {
            let dir = array.placement.direction(a, cut.elevation_deg);
            let obs = match cut.radius {
                Some(r) => Observation::Point(center + dir * r),
                None => Observation::Direction(dir),
            };
            reflected_field(array, state, incident, &obs).map(|f| f.norm_sqr())
        })
        .collect()
}

/// Power pattern normalized to a 0 dB peak.
pub fn directivity_pattern(
    array: &RisArray,
    state: &ScatteringState,
    incident: &Wave,
    angles_deg: &[f64],
    cut: &PatternCut,
) -> Result<Vec<PatternSample>> {
    if angles_deg.is_empty() {
        return Err(Error::Domain("empty angle grid".into()));
    }
    let power = pattern_power(array, state, incident, angles_deg, cut)?;
    let peak = power.iter().cloned().fold(0.0, f64::max);
    Ok(angles_deg
        .iter()
        .zip(power)
        .map(|(&angle_deg, p)| PatternSample {
            angle_deg,
            power_db: if peak > 0.0 {
                10.0 * (p / peak).log10()
            } else {
                0.0
            },
        })
        .collect())
}

/// Angle of the global maximum, refined by a parabola through the three
/// samples around the grid argmax. Ties resolve to the smaller angle.
pub fn main_lobe_angle(pattern: &[PatternSample]) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::Domain("empty pattern".into()));
    }
    let mut best = 0;
    for (i, s) in pattern.iter().enumerate() {
        let b = &pattern[best];
        if s.power_db > b.power_db || (s.power_db == b.power_db && s.angle_deg < b.angle_deg) {
            best = i;
        }
    }
    let peak = pattern[best].angle_deg;
    if best == 0 || best + 1 == pattern.len() {
        return Ok(peak);
    }
    let (l, c, r) = (&pattern[best - 1], &pattern[best], &pattern[best + 1]);
    let step = 0.5 * (r.angle_deg - l.angle_deg);
    let curvature = l.power_db - 2.0 * c.power_db + r.power_db;
    if !(curvature < 0.0) || !l.power_db.is_finite() || !r.power_db.is_finite() {
        return Ok(peak);
    }
    let offset = 0.5 * (l.power_db - r.power_db) / curvature;
    Ok(peak + offset.clamp(-0.5, 0.5) * step)
}

/// Write `angle_deg,power_db` rows with 9 significant digits.
pub fn write_pattern_csv<W: Write>(mut out: W, pattern: &[PatternSample]) -> std::io::Result<()> {
    writeln!(out, "angle_deg,power_db")?;
    for s in pattern {
        writeln!(out, "{},{}", sig9(s.angle_deg), sig9(s.power_db))?;
    }
    Ok(())
}

//! Named scenarios embedded in the library.

use crate::engine::scenario::{load_scenario, Scenario};
use crate::{Error, Result};

const PRESETS: [(&str, &str); 6] = [
    ("fig1a", include_str!("../../presets/fig1a.json")),
    ("fig1b", include_str!("../../presets/fig1b.json")),
    ("fig1c", include_str!("../../presets/fig1c.json")),
    ("fig3", include_str!("../../presets/fig3.json")),
    ("fig4d", include_str!("../../presets/fig4d.json")),
    ("fig5", include_str!("../../presets/fig5.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a preset, as shipped.
pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`; available: {}", preset_names().join(", "))))
}

pub fn preset(name: &str) -> Result<Scenario> {
    load_scenario(preset_text(name)?)
}

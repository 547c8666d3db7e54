//! The JSON tool configuration.
//!
//! A config names the guide, the strip half-length, and optional screw,
//! quadrature, discretization, and output settings; everything optional has
//! the documented default. Schema errors carry the JSON key path; invariant
//! violations name the violated rule. Example:
//!
//! ```json
//! {
//!   "guide": { "broad_wall_width_mm": 3.76, "band_ghz": [64.0, 75.0] },
//!   "a_e_mm": 11.0,
//!   "screw": { "pitch_mm": 0.35, "max_turns": 4.0 },
//!   "quadrature": {
//!     "method": "adaptive-simpson",
//!     "abs_tolerance_rad": 1e-6,
//!     "max_subdivisions": 20
//!   },
//!   "n_sections": 512,
//!   "output_dir": "out"
//! }
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::actuation::ScrewSpec;
use crate::design::feasible_max_deflection;
use crate::error::{Error, Result};
use crate::phase::{QuadratureMethod, QuadratureSpec};
use crate::physics::{FrequencyBand, WaveguideSpec};

/// Default screw pitch [mm]: the M1.6 fine thread of the reference device.
const DEFAULT_PITCH_MM: f64 = 0.35;
/// Default transfer-matrix section count.
const DEFAULT_N_SECTIONS: usize = 512;

/// A fully resolved tool configuration, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolConfig {
    /// The guide and its operating band.
    pub guide: WaveguideSpec,
    /// Strip half-length (ellipse semi-major axis) [m].
    pub half_length_m: f64,
    /// Tuning screw.
    pub screw: ScrewSpec,
    /// Phase-integral controls.
    pub quadrature: QuadratureSpec,
    /// Section count for the transfer-matrix model.
    pub n_sections: usize,
    /// Directory that relative output paths are resolved against.
    pub output_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    guide: RawGuide,
    a_e_mm: f64,
    #[serde(default)]
    screw: Option<RawScrew>,
    #[serde(default)]
    quadrature: Option<RawQuadrature>,
    #[serde(default)]
    n_sections: Option<usize>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuide {
    broad_wall_width_mm: f64,
    band_ghz: (f64, f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScrew {
    #[serde(default)]
    pitch_mm: Option<f64>,
    #[serde(default)]
    max_turns: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    #[serde(default)]
    method: Option<RawMethod>,
    #[serde(default)]
    abs_tolerance_rad: Option<f64>,
    #[serde(default)]
    max_subdivisions: Option<u32>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum RawMethod {
    AdaptiveSimpson,
    FixedGauss,
}

impl From<RawMethod> for QuadratureMethod {
    fn from(raw: RawMethod) -> Self {
        match raw {
            RawMethod::AdaptiveSimpson => QuadratureMethod::AdaptiveSimpson,
            RawMethod::FixedGauss => QuadratureMethod::FixedGauss,
        }
    }
}

/// Parses and validates a JSON config.
///
/// Unknown keys, wrong types, and malformed JSON produce
/// [`Error::ConfigSchema`] with the key path; value rules (positive
/// dimensions, band ordering, band above cutoff, quadrature limits) produce
/// [`Error::Invariant`] naming the rule.
///
/// Defaults: `screw.pitch_mm` 0.35, `screw.max_turns` the travel that
/// reaches the zero-margin deflection limit at the low band edge,
/// `quadrature` adaptive Simpson at 1e-6 rad with depth cap 20,
/// `n_sections` 512, `output_dir` the current directory.
pub fn parse_config(text: &str) -> Result<ToolConfig> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    let raw: RawConfig =
        serde_path_to_error::deserialize(&mut deserializer).map_err(|e| Error::ConfigSchema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;

    let band = FrequencyBand::new(raw.guide.band_ghz.0 * 1e9, raw.guide.band_ghz.1 * 1e9)?;
    let guide = WaveguideSpec::new(raw.guide.broad_wall_width_mm * 1e-3, band)?;

    if !(raw.a_e_mm.is_finite() && raw.a_e_mm > 0.0) {
        return Err(Error::invariant("a_e_mm > 0"));
    }
    let half_length_m = raw.a_e_mm * 1e-3;

    let raw_screw = raw.screw.unwrap_or(RawScrew {
        pitch_mm: None,
        max_turns: None,
    });
    let pitch_m = raw_screw.pitch_mm.unwrap_or(DEFAULT_PITCH_MM) * 1e-3;
    let max_turns = raw_screw.max_turns.unwrap_or_else(|| {
        // Enough travel to reach the cutoff-limited deflection at the low
        // band edge; strictly positive because the band is above cutoff.
        feasible_max_deflection(&guide, band.low_hz, 0.0) / pitch_m
    });
    let screw = ScrewSpec::new(pitch_m, max_turns)?;

    let raw_quadrature = raw.quadrature.unwrap_or(RawQuadrature {
        method: None,
        abs_tolerance_rad: None,
        max_subdivisions: None,
    });
    let defaults = QuadratureSpec::default();
    let quadrature = QuadratureSpec::new(
        raw_quadrature.method.map_or(defaults.method, Into::into),
        raw_quadrature
            .abs_tolerance_rad
            .unwrap_or(defaults.abs_tolerance_rad),
        raw_quadrature
            .max_subdivisions
            .unwrap_or(defaults.max_subdivisions),
    )?;

    let n_sections = raw.n_sections.unwrap_or(DEFAULT_N_SECTIONS);
    if n_sections == 0 {
        return Err(Error::invariant("n_sections >= 1"));
    }

    Ok(ToolConfig {
        guide,
        half_length_m,
        screw,
        quadrature,
        n_sections,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(".")),
    })
}

//! Dominant-mode physics of a rectangular waveguide whose broad wall is
//! locally narrowed by an elliptical deformable strip.
//!
//! The guide carries the TE10 mode. A thin strip bows into the guide from
//! one broad wall; its profile is the upper half of an ellipse with
//! semi-major axis `half_length_m` along the propagation axis and semi-minor
//! axis `peak_deflection_m` into the guide. Where the strip protrudes, the
//! effective broad-wall width shrinks, the cutoff frequency rises, and the
//! phase constant drops — which is what makes the device a tunable phase
//! shifter.
//!
//! Everything here is in SI units: metres, hertz, radians per metre, ohms.

use crate::constants::{C0, MU0};
use crate::error::{Error, Result};

/// A closed frequency interval `[low_hz, high_hz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    /// Lower band edge [Hz].
    pub low_hz: f64,
    /// Upper band edge [Hz].
    pub high_hz: f64,
}

impl FrequencyBand {
    /// Creates a band, requiring `0 < low_hz < high_hz` and finite edges.
    pub fn new(low_hz: f64, high_hz: f64) -> Result<Self> {
        if !(low_hz.is_finite() && high_hz.is_finite()) {
            return Err(Error::invariant("band edges are finite"));
        }
        if low_hz <= 0.0 {
            return Err(Error::invariant("band.low_hz > 0"));
        }
        if low_hz >= high_hz {
            return Err(Error::invariant("band.low_hz < band.high_hz"));
        }
        Ok(FrequencyBand { low_hz, high_hz })
    }

    /// Band centre [Hz].
    pub fn center_hz(&self) -> f64 {
        0.5 * (self.low_hz + self.high_hz)
    }

    /// `n` uniformly spaced frequencies covering the band, endpoints
    /// included. The first and last entries equal the band edges exactly.
    pub fn grid(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::invariant("frequency grid needs at least 2 points"));
        }
        let step = (self.high_hz - self.low_hz) / (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    self.high_hz
                } else {
                    self.low_hz + i as f64 * step
                }
            })
            .collect())
    }
}

/// An air-filled rectangular waveguide and the band it is operated over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideSpec {
    /// Broad-wall width of the undisturbed guide [m].
    pub broad_wall_width_m: f64,
    /// Operating band; must lie strictly above the guide's cutoff.
    pub band: FrequencyBand,
}

impl WaveguideSpec {
    /// Creates a guide spec, requiring a positive width and an operating
    /// band that lies strictly above the guide's TE10 cutoff.
    pub fn new(broad_wall_width_m: f64, band: FrequencyBand) -> Result<Self> {
        let cutoff = cutoff_frequency(broad_wall_width_m)?;
        if band.low_hz <= cutoff {
            return Err(Error::invariant(
                "band.low_hz > cutoff_frequency(broad_wall_width)",
            ));
        }
        Ok(WaveguideSpec {
            broad_wall_width_m,
            band,
        })
    }

    /// TE10 cutoff frequency of the undisturbed guide [Hz].
    pub fn cutoff_hz(&self) -> f64 {
        C0 / (2.0 * self.broad_wall_width_m)
    }
}

/// The elliptical profile of the deformable strip.
///
/// The strip occupies `|x| <= half_length_m` along the propagation axis and
/// protrudes `height_at(x)` into the guide, peaking at `peak_deflection_m`
/// in the middle and tapering smoothly to zero at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticalStripProfile {
    /// Semi-major axis: half the strip length along the guide [m].
    pub half_length_m: f64,
    /// Semi-minor axis: peak protrusion into the guide [m].
    pub peak_deflection_m: f64,
}

impl EllipticalStripProfile {
    /// Creates a profile, requiring a positive half-length and a finite,
    /// non-negative peak deflection.
    pub fn new(half_length_m: f64, peak_deflection_m: f64) -> Result<Self> {
        if !(half_length_m.is_finite() && half_length_m > 0.0) {
            return Err(Error::invariant("half_length_m > 0"));
        }
        if !(peak_deflection_m.is_finite() && peak_deflection_m >= 0.0) {
            return Err(Error::invariant("peak_deflection_m >= 0"));
        }
        Ok(EllipticalStripProfile {
            half_length_m,
            peak_deflection_m,
        })
    }

    /// Strip protrusion at axial position `x_m` [m].
    ///
    /// `peak_deflection_m * sqrt(1 - (x/half_length)^2)` inside the strip,
    /// exactly zero outside. Even in `x_m`, maximal at `x_m = 0`.
    pub fn height_at(&self, x_m: f64) -> f64 {
        let u = x_m / self.half_length_m;
        let t = 1.0 - u * u;
        if t > 0.0 {
            self.peak_deflection_m * t.sqrt()
        } else {
            0.0
        }
    }
}

/// Effective broad-wall width at axial position `x_m`: the guide width minus
/// the strip protrusion there [m].
///
/// Errors with [`Error::DegenerateGeometry`] if the strip closes the guide
/// (effective width not positive). Outside the strip this is exactly the
/// undisturbed width.
pub fn effective_width(
    x_m: f64,
    profile: &EllipticalStripProfile,
    guide: &WaveguideSpec,
) -> Result<f64> {
    let width = guide.broad_wall_width_m - profile.height_at(x_m);
    if width <= 0.0 {
        return Err(Error::DegenerateGeometry { width_m: width });
    }
    Ok(width)
}

/// TE10 cutoff frequency of a rectangular guide of the given broad-wall
/// width [Hz]: `c0 / (2 * width)`.
pub fn cutoff_frequency(width_m: f64) -> Result<f64> {
    if !(width_m.is_finite() && width_m > 0.0) {
        return Err(Error::NonPositiveWidth { width_m });
    }
    Ok(C0 / (2.0 * width_m))
}

/// TE10 phase constant [rad/m] of a guide of the given width at the given
/// frequency:
///
/// ```text
/// beta = (2 pi / lambda0) * sqrt(1 - (lambda0 / (2 width))^2)
/// ```
///
/// Errors with [`Error::Evanescent`] when the frequency is at or below the
/// cutoff of that width, where the mode does not propagate.
pub fn phase_constant(width_m: f64, frequency_hz: f64) -> Result<f64> {
    let cutoff_hz = cutoff_frequency(width_m)?;
    if frequency_hz <= cutoff_hz {
        return Err(Error::Evanescent {
            width_m,
            frequency_hz,
            cutoff_hz,
        });
    }
    Ok(phase_constant_unchecked(width_m, frequency_hz))
}

/// [`phase_constant`] without the propagation check, for integrands whose
/// worst case has already been validated.
pub(crate) fn phase_constant_unchecked(width_m: f64, frequency_hz: f64) -> f64 {
    let lambda0 = C0 / frequency_hz;
    let ratio = lambda0 / (2.0 * width_m);
    debug_assert!(ratio < 1.0, "caller must ensure propagation");
    2.0 * std::f64::consts::PI / lambda0 * (1.0 - ratio * ratio).sqrt()
}

/// TE10 wave impedance [ohm] of a guide of the given width at the given
/// frequency: `omega * mu0 / beta`.
///
/// Always larger than the free-space impedance, growing without bound toward
/// cutoff; errors with [`Error::Evanescent`] at or below cutoff rather than
/// returning infinity.
pub fn wave_impedance(width_m: f64, frequency_hz: f64) -> Result<f64> {
    let beta = phase_constant(width_m, frequency_hz)?;
    Ok(2.0 * std::f64::consts::PI * frequency_hz * MU0 / beta)
}

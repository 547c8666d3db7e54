//! Feasibility limits and search for the shortest strip meeting a target.
//!
//! Two facts drive the search. First, the phase shift is exactly linear in
//! the strip half-length (see [`crate::phase`]), so "shift >= target" is a
//! monotone constraint in the length. Second, the band-dispersion metric is
//! invariant under that scaling, so a dispersion cap does not change with
//! length either. Feasibility is therefore monotone along the length axis,
//! and a coarse grid plus interval bisection finds the boundary.

use rayon::prelude::*;

use crate::constants::C0;
use crate::error::{Error, Result};
use crate::phase::{dispersion_metric, phase_shift_deg, phase_sweep, QuadratureSpec};
use crate::physics::{cutoff_frequency, FrequencyBand, WaveguideSpec};

/// Number of uniform length candidates in the coarse feasibility scan.
const GRID_POINTS: usize = 64;
/// Frequencies per dispersion row evaluated during the search.
const DISPERSION_FREQS: usize = 21;
/// Length-refinement stopping width [m].
const REFINE_TOL_M: f64 = 1e-6;
/// Relative back-off applied before evaluating at the deflection limit,
/// which otherwise sits exactly on the cutoff boundary (see
/// [`eval_deflection`]).
const LIMIT_BACKOFF: f64 = 1e-12;

/// Constraints for the geometry search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTargets {
    /// Band the device must cover.
    pub band: FrequencyBand,
    /// Smallest acceptable maximum phase shift at the band centre [deg].
    pub min_max_phase_deg: f64,
    /// Largest acceptable strip length (full length, `2 * half_length`) [m].
    pub max_length_m: f64,
    /// Safety margin on the throat cutoff: the narrowed guide must keep its
    /// cutoff a factor `1 + margin` below the low band edge.
    pub cutoff_margin: f64,
    /// Optional cap on the band-dispersion metric at maximum deflection.
    pub max_dispersion: Option<f64>,
}

impl DesignTargets {
    /// Checks the invariants; called by [`search_design`].
    pub fn validate(&self) -> Result<()> {
        if !(self.min_max_phase_deg.is_finite() && self.min_max_phase_deg >= 0.0) {
            return Err(Error::invariant("min_max_phase_deg >= 0"));
        }
        if !(self.max_length_m.is_finite() && self.max_length_m > 0.0) {
            return Err(Error::invariant("max_length_m > 0"));
        }
        if !(self.cutoff_margin.is_finite() && self.cutoff_margin >= 0.0) {
            return Err(Error::invariant("cutoff_margin >= 0"));
        }
        if let Some(cap) = self.max_dispersion {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::invariant("max_dispersion > 0"));
            }
        }
        Ok(())
    }
}

/// Outcome of [`search_design`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult {
    /// Selected strip half-length [m]. When `feasible` is false this is the
    /// largest length allowed, i.e. the best the constraints permit.
    pub half_length_m: f64,
    /// Cutoff-limited maximum deflection used by the evaluation [m].
    pub max_deflection_m: f64,
    /// Phase shift at maximum deflection and band centre [deg].
    pub achieved_phase_deg: f64,
    /// Band-dispersion metric at maximum deflection.
    pub dispersion: f64,
    /// Whether every constraint is met.
    pub feasible: bool,
}

/// Largest strip deflection that keeps the narrowed throat usable down to
/// `f_low_hz` with the given cutoff margin [m]:
///
/// ```text
/// b_max = width - (1 + margin) * lambda0(f_low) / 2,   clamped at 0
/// ```
///
/// A deflection beyond this pushes the throat cutoff above
/// `f_low / (1 + margin)`. Returns 0 when even the undisturbed guide fails
/// the margin, so the caller never sees a negative limit.
pub fn feasible_max_deflection(guide: &WaveguideSpec, f_low_hz: f64, cutoff_margin: f64) -> f64 {
    debug_assert!(f_low_hz > 0.0 && cutoff_margin >= 0.0);
    let lambda0_m = C0 / f_low_hz;
    let min_width_m = (1.0 + cutoff_margin) * lambda0_m / 2.0;
    (guide.broad_wall_width_m - min_width_m).max(0.0)
}

/// Phase shift at a given deflection, evaluated just inside the cutoff
/// boundary.
///
/// With zero margin the deflection limit narrows the throat to exactly half
/// a free-space wavelength at the low band edge, where the rounded cutoff
/// can land on (or an ulp above) the edge itself and the integrand is
/// formally evanescent. Backing the deflection off by one part in 1e12
/// moves the evaluation strictly inside the propagating region while
/// changing the phase by less than a nanodegree.
fn eval_deflection(
    deflection_m: f64,
    half_length_m: f64,
    guide: &WaveguideSpec,
    frequency_hz: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    phase_shift_deg(
        deflection_m * (1.0 - LIMIT_BACKOFF),
        half_length_m,
        guide,
        frequency_hz,
        quad,
    )
}

/// Largest phase shift the strip can produce at `frequency_hz` while staying
/// usable down to `f_low_hz` with the given margin [deg].
///
/// Zero when the margin leaves no usable deflection at all.
pub fn max_achievable_phase_deg(
    half_length_m: f64,
    guide: &WaveguideSpec,
    frequency_hz: f64,
    f_low_hz: f64,
    cutoff_margin: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let limit_m = feasible_max_deflection(guide, f_low_hz, cutoff_margin);
    if limit_m == 0.0 {
        return Ok(0.0);
    }
    eval_deflection(limit_m, half_length_m, guide, frequency_hz, quad)
}

/// Phase at band centre and band-dispersion metric for one candidate
/// half-length at the deflection limit.
fn evaluate_candidate(
    half_length_m: f64,
    limit_m: f64,
    guide: &WaveguideSpec,
    targets: &DesignTargets,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if limit_m == 0.0 {
        return Ok((0.0, 0.0));
    }
    let backed_m = limit_m * (1.0 - LIMIT_BACKOFF);
    let phase_deg = phase_shift_deg(
        backed_m,
        half_length_m,
        guide,
        targets.band.center_hz(),
        quad,
    )?;
    let sweep = phase_sweep(
        half_length_m,
        guide,
        &[backed_m],
        &targets.band,
        DISPERSION_FREQS,
        quad,
    )?;
    let dispersion = dispersion_metric(&sweep.phase_shift_deg[0])?;
    Ok((phase_deg, dispersion))
}

/// Finds the smallest strip half-length whose maximum-deflection phase shift
/// at the band centre meets `min_max_phase_deg` under the length, cutoff,
/// and optional dispersion constraints.
///
/// Scans [`GRID_POINTS`] uniform candidates over `(0, max_length / 2]`, then
/// bisects the first infeasible-to-feasible interval down to
/// [`REFINE_TOL_M`]; feasibility is monotone in length (see the module
/// docs), so the bisection is exact. If even the full allowed length fails,
/// the result carries that best attempt with `feasible = false` rather than
/// an error; hard failures (invalid targets, a band below the guide cutoff)
/// still error.
pub fn search_design(
    targets: &DesignTargets,
    guide: &WaveguideSpec,
    quad: &QuadratureSpec,
) -> Result<DesignResult> {
    targets.validate()?;
    quad.validate()?;
    if targets.band.low_hz <= cutoff_frequency(guide.broad_wall_width_m)? {
        return Err(Error::invariant(
            "targets.band.low_hz > cutoff_frequency(broad_wall_width)",
        ));
    }

    let limit_m = feasible_max_deflection(guide, targets.band.low_hz, targets.cutoff_margin);
    let longest_half_m = targets.max_length_m / 2.0;
    let candidates: Vec<f64> = (1..=GRID_POINTS)
        .map(|i| {
            if i == GRID_POINTS {
                longest_half_m
            } else {
                i as f64 * longest_half_m / GRID_POINTS as f64
            }
        })
        .collect();

    let evaluated: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&a| evaluate_candidate(a, limit_m, guide, targets, quad))
        .collect::<Result<_>>()?;

    let meets = |phase_deg: f64, dispersion: f64| {
        phase_deg >= targets.min_max_phase_deg
            && targets.max_dispersion.is_none_or(|cap| dispersion <= cap)
    };

    let first_feasible = evaluated
        .iter()
        .position(|&(phase, dispersion)| meets(phase, dispersion));

    let chosen_m = match first_feasible {
        None => {
            let (phase_deg, dispersion) = evaluated[GRID_POINTS - 1];
            return Ok(DesignResult {
                half_length_m: longest_half_m,
                max_deflection_m: limit_m,
                achieved_phase_deg: phase_deg,
                dispersion,
                feasible: false,
            });
        }
        // The very first candidate already works; there is no infeasible
        // lower bracket to refine against.
        Some(0) => candidates[0],
        Some(i) => {
            let mut lo = candidates[i - 1];
            let mut hi = candidates[i];
            while hi - lo > REFINE_TOL_M {
                let mid = 0.5 * (lo + hi);
                let (phase_deg, dispersion) =
                    evaluate_candidate(mid, limit_m, guide, targets, quad)?;
                if meets(phase_deg, dispersion) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };

    let (phase_deg, dispersion) = evaluate_candidate(chosen_m, limit_m, guide, targets, quad)?;
    debug_assert!(meets(phase_deg, dispersion));
    Ok(DesignResult {
        half_length_m: chosen_m,
        max_deflection_m: limit_m,
        achieved_phase_deg: phase_deg,
        dispersion,
        feasible: true,
    })
}

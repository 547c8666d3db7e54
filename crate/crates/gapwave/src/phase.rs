//! Phase accumulation along the deformed guide section.
//!
//! The transmitted wave accumulates `integral of beta(x) dx` across the
//! strip, where `beta(x)` is the TE10 phase constant of the local effective
//! width. The tunable quantity is the *phase shift*: the accumulated phase
//! of the undisturbed guide minus that of the deformed one, reported in
//! degrees and non-negative (narrowing the guide always lowers `beta`).
//!
//! The integrand has square-root behaviour at the strip ends (the elliptical
//! profile meets the wall with a vertical tangent), so the default
//! integrator is adaptive Simpson with per-cell error budgeting and a depth
//! cap; a fixed-order Gauss alternative is available for cross-checking.
//!
//! Integration runs over the normalised coordinate `u = x / half_length`,
//! which makes the integrand independent of the strip length: the result is
//! then `half_length * integral du`, so scaling the strip scales the phase
//! exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::physics::{
    cutoff_frequency, effective_width, phase_constant_unchecked, EllipticalStripProfile,
    FrequencyBand, WaveguideSpec,
};

/// Numerical integration scheme for the phase integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMethod {
    /// Adaptive Simpson with Richardson extrapolation (default).
    AdaptiveSimpson,
    /// Composite 7-point Gauss-Legendre with panel doubling.
    FixedGauss,
}

/// Integration controls for [`total_phase`] and everything built on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Integration scheme.
    pub method: QuadratureMethod,
    /// Absolute tolerance on the accumulated phase [rad].
    pub abs_tolerance_rad: f64,
    /// Refinement cap: maximum bisection depth (adaptive Simpson) or number
    /// of panel doublings (fixed Gauss).
    pub max_subdivisions: u32,
}

impl QuadratureSpec {
    /// Creates a validated spec: positive finite tolerance, at least 8
    /// subdivisions.
    pub fn new(
        method: QuadratureMethod,
        abs_tolerance_rad: f64,
        max_subdivisions: u32,
    ) -> Result<Self> {
        let spec = QuadratureSpec {
            method,
            abs_tolerance_rad,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the invariants; called by every integration entry point so
    /// that hand-constructed specs are caught too.
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance_rad.is_finite() && self.abs_tolerance_rad > 0.0) {
            return Err(Error::invariant("quadrature.abs_tolerance_rad > 0"));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::invariant("quadrature.max_subdivisions >= 8"));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    /// Adaptive Simpson, 1 microradian tolerance, depth cap 20.
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::AdaptiveSimpson,
            abs_tolerance_rad: 1e-6,
            max_subdivisions: 20,
        }
    }
}

/// Phase accumulated by the TE10 mode across the full strip section
/// `[-half_length, +half_length]` [rad].
///
/// Propagation is validated at the strip centre, the narrowest point; every
/// other position is wider and therefore further above cutoff. Errors with
/// [`Error::Evanescent`] when the throat is at or below cutoff, with
/// [`Error::DegenerateGeometry`] when the strip closes the guide, and with
/// [`Error::QuadratureDidNotConverge`] when the integrator cannot meet the
/// requested tolerance within its refinement cap.
pub fn total_phase(
    profile: &EllipticalStripProfile,
    guide: &WaveguideSpec,
    frequency_hz: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    let throat_m = effective_width(0.0, profile, guide)?;
    let cutoff_hz = cutoff_frequency(throat_m)?;
    if frequency_hz <= cutoff_hz {
        return Err(Error::Evanescent {
            width_m: throat_m,
            frequency_hz,
            cutoff_hz,
        });
    }

    let width_m = guide.broad_wall_width_m;
    let deflection_m = profile.peak_deflection_m;
    let integrand = |u: f64| {
        let t = 1.0 - u * u;
        let height = if t > 0.0 {
            deflection_m * t.sqrt()
        } else {
            0.0
        };
        phase_constant_unchecked(width_m - height, frequency_hz)
    };

    // The integral over x equals half_length times the integral over u, so
    // the tolerance is tightened accordingly (never loosened for short
    // strips, hence the max with 1).
    let half_length_m = profile.half_length_m;
    let tol_u = quad.abs_tolerance_rad / half_length_m.max(1.0);
    let (value_u, err_u) = match quad.method {
        QuadratureMethod::AdaptiveSimpson => {
            adaptive_simpson(&integrand, -1.0, 1.0, tol_u, quad.max_subdivisions)
        }
        QuadratureMethod::FixedGauss => {
            fixed_gauss(&integrand, -1.0, 1.0, tol_u, quad.max_subdivisions)
        }
    };
    if err_u > tol_u {
        return Err(Error::QuadratureDidNotConverge {
            estimated_error: err_u * half_length_m,
            tolerance: quad.abs_tolerance_rad,
        });
    }
    Ok(half_length_m * value_u)
}

/// Phase shift of the deformed guide relative to the undisturbed one [deg]:
/// `total_phase(flat) - total_phase(deflected)`, converted to degrees.
///
/// Non-negative for any valid deflection, exactly zero for zero deflection,
/// and strictly increasing with deflection.
pub fn phase_shift_deg(
    deflection_m: f64,
    half_length_m: f64,
    guide: &WaveguideSpec,
    frequency_hz: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let deformed = EllipticalStripProfile::new(half_length_m, deflection_m)?;
    let flat = EllipticalStripProfile::new(half_length_m, 0.0)?;
    let reference = total_phase(&flat, guide, frequency_hz, quad)?;
    let deflected = total_phase(&deformed, guide, frequency_hz, quad)?;
    Ok((reference - deflected).to_degrees())
}

/// A phase-shift table over a deflection list and a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSweep {
    /// Row coordinates: strip peak deflections, ascending [m].
    pub deflections_m: Vec<f64>,
    /// Column coordinates: uniform frequency grid, ascending [Hz].
    pub frequencies_hz: Vec<f64>,
    /// `phase_shift_deg[i][j]` is the shift at `deflections_m[i]`,
    /// `frequencies_hz[j]` [deg].
    pub phase_shift_deg: Vec<Vec<f64>>,
}

/// Computes the phase-shift table for one strip length over a deflection
/// list and `n_freq` uniform frequencies spanning `band` (endpoints
/// included).
///
/// Deflections must be sorted ascending. Feasibility is pre-checked at the
/// worst grid point (largest deflection, lowest frequency) so that the
/// common failure is reported deterministically; any residual per-point
/// failure is wrapped in [`Error::SweepPoint`] naming its grid point.
/// Rows are computed in parallel but the result is identical for any thread
/// count.
pub fn phase_sweep(
    half_length_m: f64,
    guide: &WaveguideSpec,
    deflections_m: &[f64],
    band: &FrequencyBand,
    n_freq: usize,
    quad: &QuadratureSpec,
) -> Result<PhaseSweep> {
    quad.validate()?;
    if deflections_m.is_empty() {
        return Err(Error::EmptyInput("deflection list"));
    }
    if !deflections_m.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::invariant("deflections sorted ascending"));
    }
    let frequencies_hz = band.grid(n_freq)?;

    // Worst case over the whole grid: the deepest deflection at the lowest
    // frequency. If that point is feasible, every other point is too.
    let deepest = *deflections_m.last().expect("non-empty");
    let worst = EllipticalStripProfile::new(half_length_m, deepest)?;
    if let Err(e) = total_phase(&worst, guide, band.low_hz, quad) {
        return Err(Error::SweepPoint {
            deflection_m: deepest,
            frequency_hz: band.low_hz,
            source: Box::new(e),
        });
    }

    let phase_shift_table = deflections_m
        .par_iter()
        .map(|&deflection_m| {
            frequencies_hz
                .iter()
                .map(|&frequency_hz| {
                    phase_shift_deg(deflection_m, half_length_m, guide, frequency_hz, quad).map_err(
                        |e| Error::SweepPoint {
                            deflection_m,
                            frequency_hz,
                            source: Box::new(e),
                        },
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    Ok(PhaseSweep {
        deflections_m: deflections_m.to_vec(),
        frequencies_hz,
        phase_shift_deg: phase_shift_table,
    })
}

/// Relative spread of a phase-shift row across the band:
/// `(max - min) / mean`, dimensionless.
///
/// Zero for a constant row (including all-zero). Errors on an empty row and
/// on a non-constant row with zero mean, where the ratio is undefined.
pub fn dispersion_metric(row: &[f64]) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::EmptyInput("dispersion row"));
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::invariant("dispersion row entries are finite"));
    }
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == min {
        return Ok(0.0);
    }
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    if mean == 0.0 {
        return Err(Error::ZeroMeanRow);
    }
    Ok((max - min) / mean)
}

/// One cell of the adaptive-Simpson work stack.
struct Cell {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    /// Simpson estimate over `[a, b]` using `fa`, `fm`, `fb`.
    coarse: f64,
    /// Error budget allotted to this cell.
    eps: f64,
    depth: u32,
}

/// Adaptive Simpson with Richardson extrapolation.
///
/// Each cell is bisected until the classic `|S2 - S1| <= 15 eps` criterion
/// holds, with the budget `eps` halved per level so the accepted cells'
/// budgets sum to at most `tol`. Cells still unconverged at `max_depth` are
/// accepted anyway and their `|S2 - S1| / 15` estimates accumulated, so a
/// genuinely hard integrand surfaces as a large returned error estimate
/// rather than a hard failure deep in the recursion; the caller compares the
/// estimate against the tolerance. Returns `(integral, error_estimate)`.
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (f64, f64) {
    let fa = f(a);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let fb = f(b);
    let coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let mut integral = 0.0;
    let mut err_estimate = 0.0;
    let mut stack = vec![Cell {
        a,
        b,
        fa,
        fm,
        fb,
        coarse,
        eps: tol,
        depth: 0,
    }];
    while let Some(cell) = stack.pop() {
        let mid = 0.5 * (cell.a + cell.b);
        let left_mid = 0.5 * (cell.a + mid);
        let right_mid = 0.5 * (mid + cell.b);
        let f_left = f(left_mid);
        let f_right = f(right_mid);
        let h12 = (cell.b - cell.a) / 12.0;
        let left = h12 * (cell.fa + 4.0 * f_left + cell.fm);
        let right = h12 * (cell.fm + 4.0 * f_right + cell.fb);
        let refined = left + right;
        let diff = refined - cell.coarse;
        if diff.abs() <= 15.0 * cell.eps || cell.depth >= max_depth {
            integral += refined + diff / 15.0;
            err_estimate += diff.abs() / 15.0;
        } else {
            let child_eps = 0.5 * cell.eps;
            stack.push(Cell {
                a: cell.a,
                b: mid,
                fa: cell.fa,
                fm: f_left,
                fb: cell.fm,
                coarse: left,
                eps: child_eps,
                depth: cell.depth + 1,
            });
            stack.push(Cell {
                a: mid,
                b: cell.b,
                fa: cell.fm,
                fm: f_right,
                fb: cell.fb,
                coarse: right,
                eps: child_eps,
                depth: cell.depth + 1,
            });
        }
    }
    (integral, err_estimate)
}

/// Abscissae of 7-point Gauss-Legendre on `[-1, 1]` (positive half).
const GAUSS7_NODES: [f64; 3] = [
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_5,
    0.949_107_912_342_758_5,
];
/// Weights paired with [`GAUSS7_NODES`]; first entry is the centre weight.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Composite 7-point Gauss-Legendre over `panels` equal panels.
fn gauss_composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let center = lo + 0.5 * h;
        let scale = 0.5 * h;
        let mut panel = GAUSS7_WEIGHTS[0] * f(center);
        for (node, weight) in GAUSS7_NODES.iter().zip(&GAUSS7_WEIGHTS[1..]) {
            panel += weight * (f(center - scale * node) + f(center + scale * node));
        }
        sum += scale * panel;
    }
    sum
}

/// Fixed-order Gauss quadrature with panel doubling, starting from 8 panels
/// and doubling at most `max_doublings` times until two successive composite
/// values agree within `tol`. Returns `(integral, error_estimate)` where the
/// estimate is the last inter-refinement change.
fn fixed_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_doublings: u32) -> (f64, f64) {
    let mut panels = 8usize;
    let mut previous = gauss_composite(f, a, b, panels);
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let current = gauss_composite(f, a, b, panels);
        change = (current - previous).abs();
        if change <= tol {
            return (current, change);
        }
        previous = current;
    }
    (previous, change)
}

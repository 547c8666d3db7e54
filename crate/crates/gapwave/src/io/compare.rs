//! Model-versus-measurement comparison.
//!
//! A trace is a scalar quantity sampled over frequency: an unwrapped phase
//! shift in degrees or a reflection/transmission magnitude in dB. Comparing
//! interpolates the model linearly onto every measured frequency inside the
//! overlap of the two ranges and reports signed-error statistics plus the
//! per-point residuals, with `error = measured - model`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Which quantity a trace carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum TraceKind {
    /// Phase shift relative to the undisturbed guide [deg].
    #[serde(rename = "phase")]
    #[value(name = "phase")]
    Phase,
    /// Reflection magnitude [dB].
    #[serde(rename = "s11_db")]
    #[value(name = "s11_db")]
    S11Db,
    /// Transmission magnitude [dB].
    #[serde(rename = "s21_db")]
    #[value(name = "s21_db")]
    S21Db,
}

impl std::fmt::Display for TraceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TraceKind::Phase => "phase",
            TraceKind::S11Db => "s11_db",
            TraceKind::S21Db => "s21_db",
        };
        f.write_str(name)
    }
}

/// A scalar quantity sampled over strictly increasing frequencies [GHz].
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// What the values are.
    pub kind: TraceKind,
    /// `(frequency [GHz], value)` samples, strictly increasing in frequency.
    pub points: Vec<(f64, f64)>,
}

/// One measured point against the interpolated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// Measured frequency [GHz].
    pub freq_ghz: f64,
    /// Model value interpolated to that frequency.
    pub model: f64,
    /// Measured value.
    pub measured: f64,
    /// `measured - model`.
    pub error: f64,
}

/// Error statistics over the overlapping frequency range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Quantity compared.
    pub kind: TraceKind,
    /// Measured points inside the overlap.
    pub n_points: usize,
    /// Signed mean of `measured - model`.
    pub mean_error: f64,
    /// Root-mean-square of `measured - model`.
    pub rms_error: f64,
    /// Largest `|measured - model|`.
    pub max_abs_error: f64,
    /// Per-point details, in measured order.
    pub residuals: Vec<Residual>,
}

fn require_increasing(points: &[(f64, f64)], what: &'static str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    if !points.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::UnsortedFrequencies(format!(
            "{what} trace must be strictly increasing in frequency"
        )));
    }
    Ok(())
}

/// Linear interpolation of the model trace at `freq_ghz`, which the caller
/// guarantees lies within the model's span.
fn interpolate(points: &[(f64, f64)], freq_ghz: f64) -> f64 {
    let right = points.partition_point(|&(f, _)| f < freq_ghz);
    if right == 0 {
        return points[0].1;
    }
    if right == points.len() {
        return points[points.len() - 1].1;
    }
    let (f0, v0) = points[right - 1];
    let (f1, v1) = points[right];
    if freq_ghz == f0 {
        return v0;
    }
    let t = (freq_ghz - f0) / (f1 - f0);
    v0 + t * (v1 - v0)
}

/// Compares a model trace against a measured one.
///
/// The model needs at least two points (it is interpolated); the measured
/// trace at least one. Points outside the overlap of the two frequency
/// ranges are ignored; if nothing overlaps, the comparison fails with
/// [`Error::DisjointRanges`]. A kind mismatch fails with
/// [`Error::TraceKindMismatch`].
pub fn compare_traces(model: &Trace, measured: &Trace) -> Result<ComparisonReport> {
    if model.kind != measured.kind {
        return Err(Error::TraceKindMismatch {
            model: model.kind.to_string(),
            measured: measured.kind.to_string(),
        });
    }
    require_increasing(&model.points, "model")?;
    require_increasing(&measured.points, "measured")?;
    if model.points.len() < 2 {
        return Err(Error::invariant("model trace has at least 2 points"));
    }

    let model_low = model.points[0].0;
    let model_high = model.points[model.points.len() - 1].0;
    let measured_low = measured.points[0].0;
    let measured_high = measured.points[measured.points.len() - 1].0;

    let residuals: Vec<Residual> = measured
        .points
        .iter()
        .filter(|&&(f, _)| f >= model_low && f <= model_high)
        .map(|&(freq_ghz, value)| {
            let model_value = interpolate(&model.points, freq_ghz);
            Residual {
                freq_ghz,
                model: model_value,
                measured: value,
                error: value - model_value,
            }
        })
        .collect();

    if residuals.is_empty() {
        return Err(Error::DisjointRanges {
            model_low_ghz: model_low,
            model_high_ghz: model_high,
            measured_low_ghz: measured_low,
            measured_high_ghz: measured_high,
        });
    }

    let n = residuals.len() as f64;
    let mean_error = residuals.iter().map(|r| r.error).sum::<f64>() / n;
    let rms_error = (residuals.iter().map(|r| r.error * r.error).sum::<f64>() / n).sqrt();
    let max_abs_error = residuals
        .iter()
        .map(|r| r.error.abs())
        .fold(0.0f64, f64::max);

    Ok(ComparisonReport {
        kind: model.kind,
        n_points: residuals.len(),
        mean_error,
        rms_error,
        max_abs_error,
        residuals,
    })
}

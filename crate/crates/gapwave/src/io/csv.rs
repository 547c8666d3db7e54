//! CSV writers for sweep and calibration tables, and the measured-trace
//! reader.
//!
//! Columns are fixed per table kind:
//!
//! - phase sweeps: `freq_ghz,be_mm,phase_deg`, one row per (deflection,
//!   frequency) pair, grouped by deflection;
//! - calibration tables: `turns,be_mm,phase_deg`;
//! - measured traces: `freq_ghz,value` with strictly increasing frequency.
//!
//! Numbers are written with ten significant digits, which round-trips every
//! value in these tables through text to within one part in 1e9.

use std::io::Write;

use crate::actuation::ScrewSetting;
use crate::error::{Error, Result};
use crate::phase::PhaseSweep;

/// Header of a phase-sweep table.
pub const PHASE_SWEEP_HEADER: &str = "freq_ghz,be_mm,phase_deg";
/// Header of a calibration table.
pub const CALIBRATION_HEADER: &str = "turns,be_mm,phase_deg";
/// Header of a measured trace.
pub const MEASURED_HEADER: &str = "freq_ghz,value";

/// Writes a phase-sweep table (`freq_ghz,be_mm,phase_deg`), one row per
/// grid point, frequency varying fastest within each deflection group.
pub fn write_phase_sweep_csv<W: Write>(sweep: &PhaseSweep, writer: &mut W) -> Result<()> {
    writeln!(writer, "{PHASE_SWEEP_HEADER}")?;
    for (row, &deflection_m) in sweep.phase_shift_deg.iter().zip(&sweep.deflections_m) {
        for (&phase_deg, &frequency_hz) in row.iter().zip(&sweep.frequencies_hz) {
            writeln!(
                writer,
                "{:.9e},{:.9e},{:.9e}",
                frequency_hz / 1e9,
                deflection_m * 1e3,
                phase_deg
            )?;
        }
    }
    Ok(())
}

/// Writes a calibration table (`turns,be_mm,phase_deg`), one row per screw
/// setting.
pub fn write_calibration_csv<W: Write>(table: &[ScrewSetting], writer: &mut W) -> Result<()> {
    writeln!(writer, "{CALIBRATION_HEADER}")?;
    for setting in table {
        writeln!(
            writer,
            "{:.9e},{:.9e},{:.9e}",
            setting.turns,
            setting.deflection_m * 1e3,
            setting.phase_shift_deg
        )?;
    }
    Ok(())
}

/// Reads a measured trace: `freq_ghz,value` rows, optional header, strictly
/// increasing frequency, at least one point.
///
/// Parse failures report the one-based line number; interior blank lines are
/// skipped.
pub fn read_measured_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut saw_any_content = false;
    for (index, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_any_content {
            saw_any_content = true;
            if line == MEASURED_HEADER {
                continue;
            }
        }
        let number = index + 1;
        let mut fields = line.split(',');
        let (freq_field, value_field) = match (fields.next(), fields.next(), fields.next()) {
            (Some(f), Some(v), None) => (f, v),
            _ => {
                return Err(Error::CsvParse {
                    line: number,
                    message: format!("expected 2 comma-separated fields, got `{line}`"),
                })
            }
        };
        let parse = |field: &str, what: &str| -> Result<f64> {
            field.trim().parse::<f64>().map_err(|_| Error::CsvParse {
                line: number,
                message: format!("cannot parse {what} `{}` as a number", field.trim()),
            })
        };
        let freq_ghz = parse(freq_field, "frequency")?;
        let value = parse(value_field, "value")?;
        if !(freq_ghz.is_finite() && value.is_finite()) {
            return Err(Error::CsvParse {
                line: number,
                message: "values must be finite".to_string(),
            });
        }
        if let Some(&(previous, _)) = points.last() {
            if freq_ghz <= previous {
                return Err(Error::UnsortedFrequencies(format!(
                    "line {number}: {freq_ghz} GHz follows {previous} GHz"
                )));
            }
        }
        points.push((freq_ghz, value));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("measured trace"));
    }
    Ok(points)
}

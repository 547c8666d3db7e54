//! Touchstone (.s2p) writer and reader for two-port S-parameter sweeps.
//!
//! Files use the version-1 format: an option line `# GHz S RI R 1` and one
//! data row per frequency with the four parameters in the two-port column
//! order S11, S21, S12, S22 as real/imaginary pairs. The reference
//! "resistance" is nominal: these waves are power-normalised to the
//! frequency-dependent TE10 wave impedance of the port guide, which the
//! leading comment lines state explicitly.
//!
//! Numbers carry nine significant digits, enough to round-trip through text
//! to within one part in 1e8.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tmm::TwoPortSParams;

/// The option line written and required by this module.
pub const OPTION_LINE: &str = "# GHz S RI R 1";

/// Writes a two-port sweep as Touchstone v1, one row per frequency.
///
/// The sweep must be non-empty with strictly increasing frequencies.
pub fn write_touchstone<W: Write>(sweep: &[(f64, TwoPortSParams)], writer: &mut W) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::EmptyInput("S-parameter sweep"));
    }
    if !sweep.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::UnsortedFrequencies(
            "S-parameter sweep must be strictly increasing in frequency".to_string(),
        ));
    }
    writeln!(
        writer,
        "! Two-port S-parameters of a screw-tuned waveguide phase shifter"
    )?;
    writeln!(
        writer,
        "! Waves are power-normalised to the TE10 wave impedance of the port guide at each frequency"
    )?;
    writeln!(writer, "{OPTION_LINE}")?;
    for (frequency_hz, s) in sweep {
        writeln!(
            writer,
            "{:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e}",
            frequency_hz / 1e9,
            unsign_zero(s.s11.re),
            unsign_zero(s.s11.im),
            unsign_zero(s.s21.re),
            unsign_zero(s.s21.im),
            unsign_zero(s.s12.re),
            unsign_zero(s.s12.im),
            unsign_zero(s.s22.re),
            unsign_zero(s.s22.im)
        )?;
    }
    Ok(())
}

/// Folds -0.0 into 0.0 so exact nulls print without a stray sign; leaves
/// every other value bit-identical.
fn unsign_zero(value: f64) -> f64 {
    value + 0.0
}

/// Reads a Touchstone v1 two-port file produced by [`write_touchstone`]
/// (or any file restricted to the same `# GHz S RI R 1` settings).
///
/// Comment lines are skipped; the option line must precede the data; parse
/// failures report the one-based line number.
pub fn read_touchstone(text: &str) -> Result<Vec<(f64, TwoPortSParams)>> {
    let mut sweep: Vec<(f64, TwoPortSParams)> = Vec::new();
    let mut saw_option_line = false;
    for (index, raw_line) in text.lines().enumerate() {
        let number = index + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if let Some(options) = line.strip_prefix('#') {
            if saw_option_line {
                return Err(Error::TouchstoneParse {
                    line: number,
                    message: "second option line".to_string(),
                });
            }
            let tokens: Vec<String> = options
                .split_whitespace()
                .map(|t| t.to_ascii_uppercase())
                .collect();
            if tokens != ["GHZ", "S", "RI", "R", "1"] {
                return Err(Error::TouchstoneParse {
                    line: number,
                    message: format!("unsupported option line `{line}`; expected `{OPTION_LINE}`"),
                });
            }
            saw_option_line = true;
            continue;
        }
        if !saw_option_line {
            return Err(Error::TouchstoneParse {
                line: number,
                message: "data before the option line".to_string(),
            });
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::TouchstoneParse {
                    line: number,
                    message: format!("cannot parse `{t}` as a number"),
                })
            })
            .collect::<Result<_>>()?;
        if fields.len() != 9 {
            return Err(Error::TouchstoneParse {
                line: number,
                message: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let frequency_hz = fields[0] * 1e9;
        if let Some(&(previous, _)) = sweep.last() {
            if frequency_hz <= previous {
                return Err(Error::UnsortedFrequencies(format!(
                    "line {number}: {} GHz follows {} GHz",
                    fields[0],
                    previous / 1e9
                )));
            }
        }
        sweep.push((
            frequency_hz,
            TwoPortSParams {
                s11: Complex64::new(fields[1], fields[2]),
                s21: Complex64::new(fields[3], fields[4]),
                s12: Complex64::new(fields[5], fields[6]),
                s22: Complex64::new(fields[7], fields[8]),
            },
        ));
    }
    if sweep.is_empty() {
        return Err(Error::EmptyInput("Touchstone file"));
    }
    Ok(sweep)
}

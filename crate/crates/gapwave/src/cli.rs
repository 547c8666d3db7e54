//! The `gapwave` command line.
//!
//! Every subcommand loads the same JSON config (`--config`, required) and
//! works in engineering units at the boundary: millimetres, gigahertz,
//! degrees. Tables and reports go to stdout unless `--out` names a file,
//! which is resolved against the config's `output_dir` when relative.
//!
//! Exit codes: 0 on success, 1 on domain or I/O failures (infeasible
//! targets, evanescent modes, unreadable files, schema violations), 2 on
//! command-line usage errors. The `GAPWAVE_THREADS` environment variable
//! caps worker threads (0 or unset picks the automatic count); outputs are
//! byte-identical for any thread count.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::actuation::calibration_table;
use crate::design::{search_design, DesignTargets};
use crate::error::Result;
use crate::io::compare::{compare_traces, Trace, TraceKind};
use crate::io::config::{parse_config, ToolConfig};
use crate::io::csv::{read_measured_csv, write_calibration_csv, write_phase_sweep_csv};
use crate::io::touchstone::write_touchstone;
use crate::phase::{phase_shift_deg, phase_sweep};
use crate::physics::{EllipticalStripProfile, FrequencyBand};
use crate::tmm::sweep_sparams;

#[derive(Parser, Debug)]
#[command(
    name = "gapwave",
    version,
    about = "Design and analysis of screw-tuned waveguide phase shifters"
)]
struct Cli {
    /// Path to the JSON tool configuration.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase shift for one deflection at one frequency.
    Phase {
        /// Strip peak deflection [mm].
        #[arg(long, value_name = "MM")]
        be: f64,
        /// Frequency [GHz].
        #[arg(long, value_name = "GHZ")]
        freq: f64,
    },
    /// Phase-shift table over deflections and the band (CSV).
    Sweep {
        /// Strip peak deflection [mm]; repeat the flag for several rows.
        #[arg(long, value_name = "MM", required = true)]
        be: Vec<f64>,
        /// Override the analysis band, as low:high [GHz].
        #[arg(long, value_name = "GHZ:GHZ", value_parser = parse_band_ghz)]
        band: Option<(f64, f64)>,
        /// Number of frequency points.
        #[arg(long, value_name = "N", default_value_t = 23)]
        nfreq: usize,
        /// Output file (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Two-port S-parameters over the band (Touchstone .s2p).
    Sparams {
        /// Strip peak deflection [mm].
        #[arg(long, value_name = "MM")]
        be: f64,
        /// Override the analysis band, as low:high [GHz].
        #[arg(long, value_name = "GHZ:GHZ", value_parser = parse_band_ghz)]
        band: Option<(f64, f64)>,
        /// Number of frequency points.
        #[arg(long, value_name = "N", default_value_t = 221)]
        nfreq: usize,
        /// Section count for the transfer-matrix model (config default 512).
        #[arg(long, value_name = "N")]
        nsections: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Screw calibration table at one frequency (CSV).
    Calibrate {
        /// Frequency [GHz].
        #[arg(long, value_name = "GHZ")]
        freq: f64,
        /// Number of rows from rest to the usable maximum.
        #[arg(long, value_name = "N", default_value_t = 11)]
        npoints: usize,
        /// Output file (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Shortest strip meeting a phase-shift target (JSON report).
    Design {
        /// Required maximum phase shift at the band centre [deg].
        #[arg(long, value_name = "DEG")]
        min_phase: f64,
        /// Largest allowed strip length [mm].
        #[arg(long, value_name = "MM")]
        max_length: f64,
        /// Cutoff safety margin (fraction, e.g. 0.05).
        #[arg(long, value_name = "FRAC", default_value_t = 0.0)]
        margin: f64,
        /// Cap on the band-dispersion metric.
        #[arg(long, value_name = "X")]
        max_dispersion: Option<f64>,
        /// Override the target band, as low:high [GHz].
        #[arg(long, value_name = "GHZ:GHZ", value_parser = parse_band_ghz)]
        band: Option<(f64, f64)>,
        /// Output file (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compare a model trace against measured data (JSON report).
    Compare {
        /// Quantity to compare.
        #[arg(long, value_name = "KIND")]
        kind: TraceKind,
        /// Strip peak deflection [mm].
        #[arg(long, value_name = "MM")]
        be: f64,
        /// Measured CSV with columns freq_ghz,value.
        #[arg(long, value_name = "FILE")]
        measured: PathBuf,
        /// Model grid density over the config band.
        #[arg(long, value_name = "N", default_value_t = 201)]
        nfreq: usize,
        /// Section count for S-parameter kinds (config default 512).
        #[arg(long, value_name = "N")]
        nsections: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Parses a `low:high` band flag in GHz.
fn parse_band_ghz(text: &str) -> std::result::Result<(f64, f64), String> {
    let (low_text, high_text) = text
        .split_once(':')
        .ok_or_else(|| format!("expected low:high in GHz (e.g. 64:75), got `{text}`"))?;
    let low: f64 = low_text
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{low_text}` as GHz"))?;
    let high: f64 = high_text
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{high_text}` as GHz"))?;
    if !(low.is_finite() && high.is_finite() && low > 0.0 && low < high) {
        return Err(format!("band must satisfy 0 < low < high, got `{text}`"));
    }
    Ok((low, high))
}

/// Applies `GAPWAVE_THREADS` before any parallel work starts.
fn configure_threads() -> std::result::Result<(), String> {
    let value = match std::env::var("GAPWAVE_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err("GAPWAVE_THREADS is not valid unicode".to_string())
        }
        Ok(value) => value,
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("GAPWAVE_THREADS must be a non-negative integer, got `{value}`"))?;
    if threads > 0 {
        // Ignore the error if a pool already exists (e.g. repeated in-process
        // calls); the cap is best-effort and results never depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return 2;
    }
    let Some(config_path) = cli.config else {
        eprintln!("error: --config <FILE> is required");
        return 2;
    };
    match execute(&config_path, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// JSON shape of the `design` report.
#[derive(Serialize)]
struct DesignReport {
    feasible: bool,
    a_e_mm: f64,
    length_mm: f64,
    b_e_max_mm: f64,
    achieved_phase_deg: f64,
    dispersion: f64,
    band_ghz: (f64, f64),
}

fn execute(config_path: &Path, command: Command) -> Result<()> {
    let config_text = fs::read_to_string(config_path)?;
    let config = parse_config(&config_text)?;

    match command {
        Command::Phase { be, freq } => {
            let shift = phase_shift_deg(
                be * 1e-3,
                config.half_length_m,
                &config.guide,
                freq * 1e9,
                &config.quadrature,
            )?;
            println!("{shift:.3}°");
            Ok(())
        }
        Command::Sweep {
            be,
            band,
            nfreq,
            out,
        } => {
            let mut deflections_m: Vec<f64> = be.iter().map(|mm| mm * 1e-3).collect();
            deflections_m.sort_by(f64::total_cmp);
            let band = resolve_band(&config, band)?;
            let sweep = phase_sweep(
                config.half_length_m,
                &config.guide,
                &deflections_m,
                &band,
                nfreq,
                &config.quadrature,
            )?;
            let mut buffer = Vec::new();
            write_phase_sweep_csv(&sweep, &mut buffer)?;
            emit(&config, out.as_deref(), &buffer)
        }
        Command::Sparams {
            be,
            band,
            nfreq,
            nsections,
            out,
        } => {
            let profile = EllipticalStripProfile::new(config.half_length_m, be * 1e-3)?;
            let band = resolve_band(&config, band)?;
            let sweep = sweep_sparams(
                &profile,
                &config.guide,
                &band,
                nfreq,
                nsections.unwrap_or(config.n_sections),
            )?;
            let mut buffer = Vec::new();
            write_touchstone(&sweep, &mut buffer)?;
            emit(&config, out.as_deref(), &buffer)
        }
        Command::Calibrate { freq, npoints, out } => {
            let table = calibration_table(
                freq * 1e9,
                config.half_length_m,
                &config.guide,
                &config.screw,
                &config.quadrature,
                npoints,
            )?;
            let mut buffer = Vec::new();
            write_calibration_csv(&table, &mut buffer)?;
            emit(&config, out.as_deref(), &buffer)
        }
        Command::Design {
            min_phase,
            max_length,
            margin,
            max_dispersion,
            band,
            out,
        } => {
            let band = resolve_band(&config, band)?;
            let targets = DesignTargets {
                band,
                min_max_phase_deg: min_phase,
                max_length_m: max_length * 1e-3,
                cutoff_margin: margin,
                max_dispersion,
            };
            let result = search_design(&targets, &config.guide, &config.quadrature)?;
            let report = DesignReport {
                feasible: result.feasible,
                a_e_mm: result.half_length_m * 1e3,
                length_mm: 2.0 * result.half_length_m * 1e3,
                b_e_max_mm: result.max_deflection_m * 1e3,
                achieved_phase_deg: result.achieved_phase_deg,
                dispersion: result.dispersion,
                band_ghz: (band.low_hz / 1e9, band.high_hz / 1e9),
            };
            let mut text =
                serde_json::to_string_pretty(&report).expect("plain JSON report serializes");
            text.push('\n');
            emit(&config, out.as_deref(), text.as_bytes())
        }
        Command::Compare {
            kind,
            be,
            measured,
            nfreq,
            nsections,
            out,
        } => {
            let model = model_trace(
                &config,
                kind,
                be * 1e-3,
                nfreq,
                nsections.unwrap_or(config.n_sections),
            )?;
            let measured_text = fs::read_to_string(&measured)?;
            let measured_trace = Trace {
                kind,
                points: read_measured_csv(&measured_text)?,
            };
            let report = compare_traces(&model, &measured_trace)?;
            let mut text =
                serde_json::to_string_pretty(&report).expect("plain JSON report serializes");
            text.push('\n');
            emit(&config, out.as_deref(), text.as_bytes())
        }
    }
}

fn resolve_band(config: &ToolConfig, flag: Option<(f64, f64)>) -> Result<FrequencyBand> {
    match flag {
        Some((low_ghz, high_ghz)) => FrequencyBand::new(low_ghz * 1e9, high_ghz * 1e9),
        None => Ok(config.guide.band),
    }
}

/// Model trace for `compare`, over the config band.
fn model_trace(
    config: &ToolConfig,
    kind: TraceKind,
    deflection_m: f64,
    nfreq: usize,
    n_sections: usize,
) -> Result<Trace> {
    let band = config.guide.band;
    let points = match kind {
        TraceKind::Phase => band
            .grid(nfreq)?
            .iter()
            .map(|&frequency_hz| {
                Ok((
                    frequency_hz / 1e9,
                    phase_shift_deg(
                        deflection_m,
                        config.half_length_m,
                        &config.guide,
                        frequency_hz,
                        &config.quadrature,
                    )?,
                ))
            })
            .collect::<Result<Vec<_>>>()?,
        TraceKind::S11Db | TraceKind::S21Db => {
            let profile = EllipticalStripProfile::new(config.half_length_m, deflection_m)?;
            let sweep = sweep_sparams(&profile, &config.guide, &band, nfreq, n_sections)?;
            sweep
                .iter()
                .map(|(frequency_hz, s)| {
                    let magnitude = match kind {
                        TraceKind::S11Db => s.s11.norm(),
                        _ => s.s21.norm(),
                    };
                    (frequency_hz / 1e9, db_floor(magnitude))
                })
                .collect()
        }
    };
    Ok(Trace { kind, points })
}

/// Magnitude in dB, floored at -200 so exact zeros (the reflection of the
/// undisturbed guide) stay finite.
fn db_floor(magnitude: f64) -> f64 {
    if magnitude <= 1e-10 {
        -200.0
    } else {
        (20.0 * magnitude.log10()).max(-200.0)
    }
}

/// Prints `content` to stdout, or writes it under the config's output
/// directory (creating directories as needed) and confirms on stderr.
fn emit(config: &ToolConfig, out: Option<&Path>, content: &[u8]) -> Result<()> {
    match out {
        None => {
            std::io::stdout().write_all(content)?;
            Ok(())
        }
        Some(path) => {
            let full = if path.is_absolute() {
                path.to_path_buf()
            } else {
                config.output_dir.join(path)
            };
            if let Some(parent) = full.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(&full, content)?;
            eprintln!("wrote {}", full.display());
            Ok(())
        }
    }
}

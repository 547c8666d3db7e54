//! File formats and measurement comparison.
//!
//! Everything the toolkit reads or writes crosses this module: the JSON tool
//! configuration, CSV tables, Touchstone S-parameter files, and the
//! model-versus-measurement comparison report. Files use engineering units
//! (mm, GHz, degrees); the core modules work in SI, and the conversion
//! happens here and nowhere else.

pub mod compare;
pub mod config;
pub mod csv;
pub mod touchstone;

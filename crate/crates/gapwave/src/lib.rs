//! Design and analysis toolkit for screw-tuned rectangular-waveguide phase
//! shifters built around an elliptical deformable strip.
//!
//! A thin metal strip bows into the guide from one broad wall; a screw sets
//! its peak deflection. The bowed strip narrows the effective broad-wall
//! width along the device, lowering the local phase constant, so the
//! transmitted wave accumulates less phase than in the undisturbed guide.
//! The difference is a continuously tunable, low-loss phase shift.
//!
//! The crate is organised bottom-up:
//!
//! - [`constants`]: physical constants.
//! - [`physics`]: TE10 dispersion, cutoff, wave impedance, and the strip
//!   geometry.
//! - [`phase`]: phase accumulation along the deformed section by adaptive
//!   quadrature, sweeps over deflection and frequency, and a band-dispersion
//!   metric.
//! - [`tmm`]: a transfer-matrix model that discretizes the profile into
//!   uniform sections and cascades them into two-port S-parameters.
//! - [`actuation`]: the screw model — turns to deflection and back, solving
//!   for the setting that realises a phase target, calibration tables.
//! - [`design`]: feasibility limits and search for the shortest strip that
//!   meets a phase-shift target under cutoff and dispersion constraints.
//! - [`io`]: config parsing, CSV and Touchstone writers/readers, and
//!   model-vs-measurement comparison.
//! - [`cli`]: the `gapwave` command-line tool built from all of the above.

pub mod actuation;
pub mod cli;
pub mod constants;
pub mod design;
pub mod error;
pub mod io;
pub mod phase;
pub mod physics;
pub mod tmm;

pub use error::{Error, Result};

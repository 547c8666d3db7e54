//! Error type shared by every module in the crate.
//!
//! All fallible operations return [`Result<T>`]. Variants carry enough
//! context (offending values, indices, file positions) that a CLI user can
//! act on the message without consulting the source.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or config invariant was violated. The message names the
    /// invariant, e.g. `"a_e_mm > 0"`.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A waveguide width that must be strictly positive was not.
    #[error("waveguide width must be positive, got {width_m} m")]
    NonPositiveWidth {
        /// Offending width [m].
        width_m: f64,
    },

    /// The deformable strip leaves no aperture (effective width <= 0).
    #[error("degenerate geometry: effective width {width_m} m is not positive")]
    DegenerateGeometry {
        /// Offending effective width [m].
        width_m: f64,
    },

    /// The dominant mode does not propagate at the requested frequency.
    #[error(
        "evanescent mode: {frequency_hz} Hz is at or below the {cutoff_hz} Hz \
         cutoff of a {width_m} m wide guide"
    )]
    Evanescent {
        /// Guide width [m].
        width_m: f64,
        /// Requested frequency [Hz].
        frequency_hz: f64,
        /// Cutoff frequency of that width [Hz].
        cutoff_hz: f64,
    },

    /// A section of a discretized cascade is below cutoff.
    #[error(
        "evanescent mode in cascade section {index}: {frequency_hz} Hz is at \
         or below the {cutoff_hz} Hz cutoff of a {width_m} m wide section"
    )]
    EvanescentSection {
        /// Zero-based section index within the cascade.
        index: usize,
        /// Section width [m].
        width_m: f64,
        /// Requested frequency [Hz].
        frequency_hz: f64,
        /// Cutoff frequency of that width [Hz].
        cutoff_hz: f64,
    },

    /// The quadrature error estimate exceeded the requested tolerance.
    #[error(
        "quadrature did not converge: estimated error {estimated_error} rad \
         exceeds the {tolerance} rad tolerance"
    )]
    QuadratureDidNotConverge {
        /// Accumulated error estimate [rad].
        estimated_error: f64,
        /// Requested absolute tolerance [rad].
        tolerance: f64,
    },

    /// A phase-sweep entry failed; wraps the underlying error with its grid point.
    #[error("sweep failed at deflection {deflection_m} m, {frequency_hz} Hz: {source}")]
    SweepPoint {
        /// Deflection of the failing row [m].
        deflection_m: f64,
        /// Frequency of the failing column [Hz].
        frequency_hz: f64,
        /// The underlying failure.
        source: Box<Error>,
    },

    /// A requested phase shift exceeds what the mechanism can reach.
    #[error(
        "infeasible target: {target_deg} deg requested but only \
         {achievable_deg} deg is reachable at the maximum deflection \
         {max_deflection_m} m"
    )]
    InfeasibleTarget {
        /// Requested phase shift [deg].
        target_deg: f64,
        /// Largest reachable phase shift [deg].
        achievable_deg: f64,
        /// Deflection at which the maximum is reached [m].
        max_deflection_m: f64,
    },

    /// A screw position outside the usable travel range.
    #[error("screw setting {turns} turns is outside [0, {max_turns}]")]
    TurnsOutOfRange {
        /// Requested setting [turns].
        turns: f64,
        /// Travel limit [turns].
        max_turns: f64,
    },

    /// A deflection that the screw cannot produce.
    #[error("deflection {deflection_m} m needs {turns} turns, outside [0, {max_turns}]")]
    DeflectionOutOfTravel {
        /// Requested deflection [m].
        deflection_m: f64,
        /// Turns it would need.
        turns: f64,
        /// Travel limit [turns].
        max_turns: f64,
    },

    /// A statistic was requested over an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Relative spread is undefined for a zero-mean row.
    #[error("dispersion metric is undefined for a zero-mean row")]
    ZeroMeanRow,

    /// Config file text violates the schema; `path` is the JSON key path.
    #[error("config schema violation at `{path}`: {message}")]
    ConfigSchema {
        /// JSON key path, e.g. `guide.band_ghz`.
        path: String,
        /// Deserializer message.
        message: String,
    },

    /// A CSV cell or row that could not be parsed.
    #[error("CSV parse error at line {line}: {message}")]
    CsvParse {
        /// One-based line number in the input.
        line: usize,
        /// What was wrong.
        message: String,
    },

    /// A Touchstone line that could not be parsed.
    #[error("Touchstone parse error at line {line}: {message}")]
    TouchstoneParse {
        /// One-based line number in the input.
        line: usize,
        /// What was wrong.
        message: String,
    },

    /// Frequencies that must be strictly increasing were not.
    #[error("frequencies must be strictly increasing: {0}")]
    UnsortedFrequencies(String),

    /// Model and measured traces have no overlapping frequency range.
    #[error(
        "disjoint frequency ranges: model spans {model_low_ghz}..{model_high_ghz} GHz, \
         measured spans {measured_low_ghz}..{measured_high_ghz} GHz"
    )]
    DisjointRanges {
        /// Model range start [GHz].
        model_low_ghz: f64,
        /// Model range end [GHz].
        model_high_ghz: f64,
        /// Measured range start [GHz].
        measured_low_ghz: f64,
        /// Measured range end [GHz].
        measured_high_ghz: f64,
    },

    /// Model and measured traces carry different quantities.
    #[error("trace kind mismatch: model is {model}, measured is {measured}")]
    TraceKindMismatch {
        /// Kind of the model trace.
        model: String,
        /// Kind of the measured trace.
        measured: String,
    },

    /// An I/O failure while reading or writing files.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor for [`Error::Invariant`].
    pub fn invariant(name: impl Into<String>) -> Self {
        Error::Invariant(name.into())
    }
}

//! Error type shared by every pipeline stage.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between ingestion and reporting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A query instant falls outside the span covered by a series.
    /// Extrapolation is never performed.
    #[error("t = {t} is outside the covered span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    /// An operation needs more samples than the input provides.
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    /// Two timestamped sequences share no time interval of positive length.
    #[error("series have no overlapping time span")]
    NoOverlap,

    /// Min-max scaling of constant data is undefined.
    #[error("'{name}' is constant; min-max scaling is undefined")]
    DegenerateRange { name: String },

    /// Paired sequences must have equal length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A straight-line fit against a constant abscissa is undefined.
    #[error("abscissa is constant; slope is undefined")]
    DegenerateX,

    /// The regression design matrix has fewer rows than coefficients.
    #[error("need at least {needed} rows to fit, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    /// A required variable is absent from a frame or input set.
    #[error("required column '{name}' is missing")]
    MissingColumn { name: String },

    /// The data carry no detectable oscillation to fit.
    #[error("no oscillation detected in the data")]
    NoOscillation,

    /// Iterative refinement hit its iteration cap before converging.
    #[error("fit did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    /// The strongest response sits on the first or last scan point, so the
    /// scanned interval does not bracket the peak.
    #[error("peak lies on the edge of the scanned interval")]
    PeakAtEdge,

    /// Contrast is a ratio against the fitted offset, which must be positive.
    #[error("fitted offset is not positive; contrast is undefined")]
    NonPositiveOffset,

    /// A threshold in degrees requires a nonzero drift rate.
    #[error("drift rate is zero; threshold is undefined")]
    ZeroRate,

    /// A quantity that must be strictly positive was not.
    #[error("{quantity} must be positive")]
    NonPositive { quantity: &'static str },

    /// A restriction or filter removed every sample.
    #[error("operation produced an empty series")]
    EmptyResult,

    /// Interval bounds were supplied in the wrong order.
    #[error("invalid interval: start {t0} exceeds end {t1}")]
    InvalidInterval { t0: f64, t1: f64 },

    /// Two samples of one variable carry the same timestamp.
    #[error("duplicate timestamp {timestamp} in '{name}'")]
    DuplicateTimestamp { name: String, timestamp: f64 },

    /// Timestamps handed to a constructor were not strictly increasing.
    #[error("timestamps of '{name}' are not strictly increasing near t = {timestamp}")]
    UnorderedTimestamps { name: String, timestamp: f64 },

    /// A NaN or infinity reached a boundary that admits only finite numbers.
    #[error("non-finite value in '{name}' at t = {timestamp}")]
    NonFinite { name: String, timestamp: f64 },

    /// Two inputs map to the same variable name.
    #[error("duplicate variable '{name}'")]
    DuplicateVariable { name: String },

    /// A text input (CSV, key-value file) failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Filesystem failure while reading or writing.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier for the variant, used by the
    /// command-line front end for single-line error reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::NoOverlap => "NoOverlap",
            Error::DegenerateRange { .. } => "DegenerateRange",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateX => "DegenerateX",
            Error::InsufficientRows { .. } => "InsufficientRows",
            Error::MissingColumn { .. } => "MissingColumn",
            Error::NoOscillation => "NoOscillation",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::PeakAtEdge => "PeakAtEdge",
            Error::NonPositiveOffset => "NonPositiveOffset",
            Error::ZeroRate => "ZeroRate",
            Error::NonPositive { .. } => "NonPositive",
            Error::EmptyResult => "EmptyResult",
            Error::InvalidInterval { .. } => "InvalidInterval",
            Error::DuplicateTimestamp { .. } => "DuplicateTimestamp",
            Error::UnorderedTimestamps { .. } => "UnorderedTimestamps",
            Error::NonFinite { .. } => "NonFinite",
            Error::DuplicateVariable { .. } => "DuplicateVariable",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures caused by malformed or unreadable input files, as
    /// opposed to data that is well-formed but unusable for a computation.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}

//! Error type shared by the decomposition and analysis modules.

use thiserror::Error;

/// Errors produced by signal construction, decomposition, and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Channels (or paired series) do not share a common length.
    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A sample is NaN or infinite.
    #[error("non-finite sample in channel {channel} at index {index}")]
    NonFinite { channel: usize, index: usize },

    /// Sampling rate must be strictly positive.
    #[error("invalid sample rate {rate} (must be > 0)")]
    RateInvalid { rate: f64 },

    /// A signal does not carry enough extrema to build an envelope.
    #[error("insufficient extrema: {maxima} maxima, {minima} minima")]
    InsufficientExtrema { maxima: usize, minima: usize },

    /// Spline construction needs at least two knots.
    #[error("too few spline knots: {count}")]
    TooFewKnots { count: usize },

    /// Two spline knots share the same abscissa.
    #[error("duplicate spline knot index {index}")]
    DuplicateKnotIndex { index: i64 },

    /// Direction scheme incompatible with the channel count.
    #[error("bad direction scheme: {reason}")]
    BadScheme { reason: String },

    /// Direction count below the 2N floor for an N-channel record.
    #[error("too few directions: {count} for {n_channels} channels (need >= {min})")]
    TooFewDirections {
        count: usize,
        n_channels: usize,
        min: usize,
    },

    /// Vector length does not match the channel count.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Every projection direction lacked the extrema needed for an envelope.
    #[error("all {count} projection directions degenerate")]
    AllDirectionsDegenerate { count: usize },

    /// BEMD/TEMD called with the wrong number of channels.
    #[error("wrong channel count: expected {expected}, got {actual}")]
    WrongChannelCount { expected: usize, actual: usize },

    /// Series too short for the requested transform.
    #[error("series too short: {len} samples (need >= {min})")]
    TooShort { len: usize, min: usize },

    /// IMF index outside the decomposed range.
    #[error("imf index {index} out of range (have {count})")]
    IndexOutOfRange { index: usize, count: usize },

    /// Analysis window contains no samples.
    #[error("empty window [{start}, {end}] s")]
    EmptyWindow { start: f64, end: f64 },

    /// Not enough zero crossings for a frequency estimate.
    #[error("too few zero crossings: {count} (need >= {min})")]
    TooFewCrossings { count: usize, min: usize },

    /// Scenario specification is inconsistent.
    #[error("bad scenario: {reason}")]
    BadScenario { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

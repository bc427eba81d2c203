//! Empirical mode decomposition for multichannel ambient measurements.
//!
//! The crate decomposes uniformly sampled signals into intrinsic mode
//! functions — univariate EMD for single channels, and projection-based
//! bivariate/trivariate/multivariate EMD for records with several channels —
//! then characterizes each IMF through Hilbert spectral analysis and ranks
//! dominant oscillation modes by energy. A deterministic synthetic scenario
//! generator with independent oracles supports end-to-end validation.

pub mod emd;
pub mod envelope;
pub mod error;
pub mod hilbert;
pub mod modes;
pub mod multivariate;
pub mod signal;
pub mod synth;

pub use emd::{emd_decompose, sd_criterion, sift_once, sift_to_imf, SiftState};
pub use envelope::{
    envelope_mean_univariate, extend_boundaries, find_extrema, spline_envelope, EnvelopeCurve,
    ExtremaSet, PlateauPolicy,
};
pub use error::{Error, Result};
pub use hilbert::{
    analytic_trace, hilbert_spectrum, hilbert_transform, joint_mode_trace, AnalyticTrace,
    ImfTraces, JointModeTrace,
};
pub use modes::{
    classify_trend, fft_amplitude_spectrum, imf_energy, mode_compass, rank_modes, spectral_crest,
    AmplitudeSpectrum, ChannelSignature, Classification, ClassifierConfig, ModeCandidate,
    ModeRanking, SpectralCrest, SpectrumWindow,
};
pub use multivariate::{
    bemd_decompose, generate_directions, memd_decompose, memd_decompose_with_directions,
    memd_sift_to_imf, multivariate_envelope_mean, project, temd_decompose, DirectionScheme,
    DirectionSet, ProjectionSeries,
};
pub use signal::{
    build_record, reconstruct, BoundaryPolicy, DecompositionConfig, DecompositionWarning, ImfSet,
    MultichannelRecord, TimeSeries,
};
pub use synth::{
    band_energy_fraction, generate, oracle_zero_crossing_frequency, recovery_report, ModeRecovery,
    ModeSpec, RecoveredMode, ScenarioSpec, StepEvent,
};

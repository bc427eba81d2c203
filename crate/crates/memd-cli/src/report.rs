//! Report structures and canonical JSON emission.
//!
//! Reports serialize through `serde_json::Value`, whose maps are sorted, so
//! identical analyses produce byte-identical JSON. Human-facing numbers are
//! rounded to 6 significant digits; trace data keeps full precision.

use serde::Serialize;

use memd::{ChannelSignature, ClassifierConfig, DecompositionConfig, ModeCandidate};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 6 significant digits for report fields.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn opt_sig6(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite()).map(sig6)
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub sd_threshold: f64,
    pub direction_count: usize,
    pub max_sift_iterations: usize,
    pub max_imfs: usize,
    pub rng_seed: u64,
    pub boundary_policy: String,
    pub trend_max_frequency_hz: f64,
    pub trend_max_phase_variance: f64,
    pub local_min_energy_share: f64,
    pub noise_min_frequency_hz: f64,
    pub min_phase_coherence: f64,
    pub highlight_band_hz: [f64; 2],
}

impl ConfigEcho {
    pub fn new(
        decomposition: &DecompositionConfig,
        classifier: &ClassifierConfig,
        n_channels: usize,
    ) -> Self {
        Self {
            sd_threshold: decomposition.sd_threshold,
            direction_count: decomposition.effective_direction_count(n_channels),
            max_sift_iterations: decomposition.max_sift_iterations,
            max_imfs: decomposition.max_imfs,
            rng_seed: decomposition.rng_seed,
            boundary_policy: "MirrorExtrema".to_string(),
            trend_max_frequency_hz: classifier.trend_max_frequency_hz,
            trend_max_phase_variance: classifier.trend_max_phase_variance,
            local_min_energy_share: classifier.local_min_energy_share,
            noise_min_frequency_hz: classifier.noise_min_frequency_hz,
            min_phase_coherence: classifier.min_phase_coherence,
            highlight_band_hz: [
                classifier.highlight_band_hz.0,
                classifier.highlight_band_hz.1,
            ],
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub record_id: String,
    pub n_channels: usize,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    pub t0_s: f64,
    pub tool_version: String,
    pub config: ConfigEcho,
}

#[derive(Debug, Serialize)]
pub struct PerChannelEntry {
    pub channel_id: String,
    pub mean_amplitude: f64,
    pub phase_rad: Option<f64>,
    pub energy_share: f64,
}

impl PerChannelEntry {
    fn from_signature(sig: &ChannelSignature) -> Self {
        Self {
            channel_id: sig.channel_id.clone(),
            mean_amplitude: sig6(sig.mean_amplitude),
            phase_rad: opt_sig6(if sig.phase_rad.is_finite() {
                Some(sig.phase_rad)
            } else {
                None
            }),
            energy_share: sig6(sig.energy_share),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ModeEntry {
    /// 1-based IMF index as reported to humans.
    pub imf_index: usize,
    pub energy: f64,
    pub classification: String,
    pub median_joint_frequency_hz: Option<f64>,
    pub mean_joint_amplitude: f64,
    pub phase_coherence: Option<f64>,
    pub in_highlight_band: bool,
    pub per_channel: Vec<PerChannelEntry>,
}

impl ModeEntry {
    pub fn from_candidate(c: &ModeCandidate, highlight_band: (f64, f64)) -> Self {
        let in_band = c
            .median_joint_frequency_hz
            .map(|f| f >= highlight_band.0 && f <= highlight_band.1)
            .unwrap_or(false);
        Self {
            imf_index: c.imf_index + 1,
            energy: sig6(c.energy),
            classification: c.classification.as_str().to_string(),
            median_joint_frequency_hz: opt_sig6(c.median_joint_frequency_hz),
            mean_joint_amplitude: sig6(c.mean_joint_amplitude),
            phase_coherence: opt_sig6(c.phase_coherence),
            in_highlight_band: in_band,
            per_channel: c
                .per_channel
                .iter()
                .map(PerChannelEntry::from_signature)
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ImfSummaryEntry {
    pub imf_index: usize,
    pub energy: f64,
    pub classification: String,
    pub median_joint_frequency_hz: Option<f64>,
    pub mean_joint_amplitude: f64,
}

#[derive(Debug, Serialize)]
pub struct TraceEntry {
    pub imf_index: usize,
    /// NaN samples serialize as null.
    pub joint_frequency_hz: Vec<f64>,
    pub joint_amplitude: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub metadata: Metadata,
    pub imf_summary: Vec<ImfSummaryEntry>,
    pub ranked_modes: Vec<ModeEntry>,
    pub excluded_modes: Vec<ModeEntry>,
    pub traces: Option<Vec<TraceEntry>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CrestEntry {
    pub frequency_hz: f64,
    pub amplitude: f64,
    pub prominence: f64,
    pub low_prominence: bool,
}

#[derive(Debug, Serialize)]
pub struct ChannelCrestEntry {
    pub channel_id: String,
    pub crest: Option<CrestEntry>,
}

#[derive(Debug, Serialize)]
pub struct MemdComparison {
    pub method: String,
    pub dominant: Option<ModeEntry>,
}

#[derive(Debug, Serialize)]
pub struct FftComparison {
    pub window: String,
    pub band_hz: [f64; 2],
    pub pooled_crest: Option<CrestEntry>,
    pub per_channel: Vec<ChannelCrestEntry>,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub schema_version: String,
    pub metadata: Metadata,
    pub memd: MemdComparison,
    pub fft: FftComparison,
    pub warnings: Vec<String>,
}

/// Canonical JSON: sorted keys, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| CliError::write(format!("serialization failed: {e}")))?;
    let mut text = serde_json::to_string_pretty(&v)
        .map_err(|e| CliError::write(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

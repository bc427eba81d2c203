//! Dominant-mode identification: IMF energy ranking, trend/noise/local
//! classification, per-channel mode compasses, and the FFT amplitude-spectrum
//! baseline.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hilbert::{interior_range, AnalyticTrace, ImfTraces};
use crate::signal::{ImfSet, TimeSeries};

/// Classification of one IMF-level mode candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// High-frequency or phase-incoherent content.
    Noise,
    /// Oscillation confined to a single channel.
    LocalMode,
    /// Coherent low-frequency oscillation shared across channels.
    InterAreaCandidate,
    /// Slow drift with near-identical phase in every channel.
    Trend,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Noise => "Noise",
            Self::LocalMode => "LocalMode",
            Self::InterAreaCandidate => "InterAreaCandidate",
            Self::Trend => "Trend",
        }
    }
}

/// Classifier thresholds. The defaults are operational choices; every one
/// is configurable.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Median joint frequency below this is a trend.
    pub trend_max_frequency_hz: f64,
    /// Circular variance of per-channel phases below this is a trend.
    pub trend_max_phase_variance: f64,
    /// One channel holding more than this energy share is a local mode.
    pub local_min_energy_share: f64,
    /// Median joint frequency above this is noise.
    pub noise_min_frequency_hz: f64,
    /// Cross-channel phase coherence below this is noise. Independent noise
    /// has drifting relative phases; a genuine shared mode holds them steady.
    pub min_phase_coherence: f64,
    /// Inter-area band of interest, used for report highlighting only.
    pub highlight_band_hz: (f64, f64),
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            trend_max_frequency_hz: 0.05,
            trend_max_phase_variance: 0.1,
            local_min_energy_share: 0.8,
            noise_min_frequency_hz: 2.0,
            min_phase_coherence: 0.35,
            highlight_band_hz: (0.1, 1.0),
        }
    }
}

/// Amplitude and relative phase of one channel within one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSignature {
    pub channel_id: String,
    pub mean_amplitude: f64,
    /// Circular mean of the phase relative to the reference channel; NaN when
    /// the channel's phase is undefined throughout the window.
    pub phase_rad: f64,
    /// Share of the IMF energy held by this channel.
    pub energy_share: f64,
}

/// One ranked oscillation candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCandidate {
    /// 0-based IMF index.
    pub imf_index: usize,
    pub energy: f64,
    pub median_joint_frequency_hz: Option<f64>,
    pub mean_joint_amplitude: f64,
    pub classification: Classification,
    pub per_channel: Vec<ChannelSignature>,
    /// Amplitude-weighted mean resultant of the relative phases over time.
    pub phase_coherence: Option<f64>,
}

/// Ranked candidates (descending energy) plus the trend/noise IMFs excluded
/// from ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRanking {
    pub ranked: Vec<ModeCandidate>,
    pub excluded: Vec<ModeCandidate>,
}

/// Energy of one IMF: the sum of squared samples over all times and channels.
pub fn imf_energy(imf_index: usize, imf_set: &ImfSet) -> Result<f64> {
    let channels = imf_set.imf(imf_index)?;
    Ok(channels
        .iter()
        .map(|ch| ch.samples().iter().map(|v| v * v).sum::<f64>())
        .sum())
}

/// Circular variance `1 - |mean of unit phasors|` over the defined phases.
fn circular_variance(phases: &[f64]) -> Option<f64> {
    let mut re = 0.0;
    let mut im = 0.0;
    let mut count = 0usize;
    for &p in phases {
        if p.is_finite() {
            re += p.cos();
            im += p.sin();
            count += 1;
        }
    }
    if count < 2 {
        return None;
    }
    Some(1.0 - (re * re + im * im).sqrt() / count as f64)
}

/// Per-channel amplitude/phase signature of one IMF over a sample window.
/// Phases are relative to `ref_channel`, combined by circular mean.
fn channel_signatures(
    traces: &[AnalyticTrace],
    ids: &[String],
    energies: &[f64],
    window: std::ops::Range<usize>,
    ref_channel: usize,
) -> Vec<ChannelSignature> {
    let total_energy: f64 = energies.iter().sum();
    let reference = &traces[ref_channel];
    traces
        .iter()
        .enumerate()
        .map(|(n, tr)| {
            let mut amp_sum = 0.0;
            let mut re = 0.0;
            let mut im = 0.0;
            let mut defined = 0usize;
            for i in window.clone() {
                amp_sum += tr.amplitude[i];
                let d = tr.phase[i] - reference.phase[i];
                if d.is_finite() {
                    re += d.cos();
                    im += d.sin();
                    defined += 1;
                }
            }
            let phase = if defined > 0 { im.atan2(re) } else { f64::NAN };
            ChannelSignature {
                channel_id: ids[n].clone(),
                mean_amplitude: amp_sum / window.len().max(1) as f64,
                phase_rad: phase,
                energy_share: if total_energy > 0.0 {
                    energies[n] / total_energy
                } else {
                    0.0
                },
            }
        })
        .collect()
}

/// Amplitude-weighted mean resultant length of the relative phase over time,
/// averaged across the non-reference channels. Near 1 for a coherent shared
/// mode, near 0 for independent noise.
fn phase_coherence(traces: &[AnalyticTrace], window: std::ops::Range<usize>) -> Option<f64> {
    if traces.len() < 2 {
        return None;
    }
    let reference = &traces[0];
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for tr in &traces[1..] {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut count = 0usize;
        let mut amp = 0.0;
        for i in window.clone() {
            let d = tr.phase[i] - reference.phase[i];
            if d.is_finite() {
                re += d.cos();
                im += d.sin();
                count += 1;
            }
            amp += tr.amplitude[i];
        }
        if count == 0 {
            continue;
        }
        let resultant = (re * re + im * im).sqrt() / count as f64;
        let mean_amp = amp / window.len().max(1) as f64;
        weighted += resultant * mean_amp;
        weight += mean_amp;
    }
    (weight > 0.0).then(|| weighted / weight)
}

/// Applies the classification rules to a distilled candidate.
///
/// Order: trend by frequency, local mode by single-channel energy share,
/// trend by phase alignment, noise (fast or phase-incoherent), otherwise
/// inter-area candidate. The energy-share check runs before the phase rule
/// because joint sifting phase-locks low-amplitude channels to a dominant
/// channel, which would otherwise make every strong local mode look
/// phase-aligned. The phase rules only apply to multichannel records.
pub fn classify_trend(candidate: &ModeCandidate, thresholds: &ClassifierConfig) -> Classification {
    let n = candidate.per_channel.len();
    if let Some(f) = candidate.median_joint_frequency_hz {
        if f < thresholds.trend_max_frequency_hz {
            return Classification::Trend;
        }
    }
    if n >= 2 {
        let dominant = candidate
            .per_channel
            .iter()
            .filter(|c| c.energy_share > thresholds.local_min_energy_share)
            .count();
        if dominant == 1 {
            return Classification::LocalMode;
        }
    }
    if n >= 2 {
        let phases: Vec<f64> = candidate.per_channel.iter().map(|c| c.phase_rad).collect();
        if let Some(v) = circular_variance(&phases) {
            if v < thresholds.trend_max_phase_variance {
                return Classification::Trend;
            }
        }
    }
    match candidate.median_joint_frequency_hz {
        None => return Classification::Noise,
        Some(f) if f > thresholds.noise_min_frequency_hz => return Classification::Noise,
        _ => {}
    }
    if n >= 2 {
        if let Some(c) = candidate.phase_coherence {
            if c < thresholds.min_phase_coherence {
                return Classification::Noise;
            }
        }
    }
    Classification::InterAreaCandidate
}

/// Builds one candidate per IMF (full-record window, channel 1 as phase
/// reference) and classifies it.
pub fn build_candidates(
    imf_set: &ImfSet,
    traces: &ImfTraces,
    thresholds: &ClassifierConfig,
) -> Result<Vec<ModeCandidate>> {
    let ids = imf_set.channel_ids();
    let mut out = Vec::with_capacity(imf_set.n_imfs());
    for m in 0..imf_set.n_imfs() {
        let channels = imf_set.imf(m)?;
        let energies: Vec<f64> = channels
            .iter()
            .map(|ch| ch.samples().iter().map(|v| v * v).sum::<f64>())
            .collect();
        let window = interior_range(imf_set.len());
        let per_channel =
            channel_signatures(&traces.per_channel[m], ids, &energies, window.clone(), 0);
        let joint = &traces.joint[m];
        let mut candidate = ModeCandidate {
            imf_index: m,
            energy: energies.iter().sum(),
            median_joint_frequency_hz: joint.median_interior_frequency(),
            mean_joint_amplitude: joint.mean_amplitude(),
            classification: Classification::Noise,
            per_channel,
            phase_coherence: phase_coherence(&traces.per_channel[m], window),
        };
        candidate.classification = classify_trend(&candidate, thresholds);
        out.push(candidate);
    }
    Ok(out)
}

/// Classifies every IMF and ranks the non-trend, non-noise candidates by
/// energy (descending; ties broken toward the faster, lower-index IMF).
pub fn rank_modes(
    imf_set: &ImfSet,
    traces: &ImfTraces,
    thresholds: &ClassifierConfig,
) -> Result<ModeRanking> {
    let candidates = build_candidates(imf_set, traces, thresholds)?;
    let (mut ranked, excluded): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|c| {
        matches!(
            c.classification,
            Classification::InterAreaCandidate | Classification::LocalMode
        )
    });
    ranked.sort_by(|a, b| {
        b.energy
            .total_cmp(&a.energy)
            .then(a.imf_index.cmp(&b.imf_index))
    });
    Ok(ModeRanking { ranked, excluded })
}

/// Per-channel amplitude and relative phase of one IMF over a time window
/// (seconds from the record start). Reference is channel 1.
pub fn mode_compass(
    imf_index: usize,
    imf_set: &ImfSet,
    traces: &ImfTraces,
    window: (f64, f64),
) -> Result<Vec<ChannelSignature>> {
    if imf_index >= imf_set.n_imfs() {
        return Err(Error::IndexOutOfRange {
            index: imf_index,
            count: imf_set.n_imfs(),
        });
    }
    let rate = imf_set.sample_rate();
    let t_len = imf_set.len();
    let start = (window.0 * rate).ceil().max(0.0) as usize;
    let end = (((window.1 * rate).floor() as i64 + 1).max(0) as usize).min(t_len);
    if start >= end {
        return Err(Error::EmptyWindow {
            start: window.0,
            end: window.1,
        });
    }
    let channels = imf_set.imf(imf_index)?;
    let energies: Vec<f64> = channels
        .iter()
        .map(|ch| ch.samples()[start..end].iter().map(|v| v * v).sum::<f64>())
        .collect();
    Ok(channel_signatures(
        &traces.per_channel[imf_index],
        imf_set.channel_ids(),
        &energies,
        start..end,
        0,
    ))
}

/// Spectral window applied before the amplitude spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumWindow {
    #[default]
    Rectangular,
    Hann,
}

/// Single-sided amplitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    /// Bin frequencies, ascending from 0 to Nyquist.
    pub frequencies: Vec<f64>,
    /// Tone-calibrated bin amplitudes (window coherent gain corrected).
    pub amplitudes: Vec<f64>,
}

/// Single-sided amplitude spectrum of one series: DFT magnitudes scaled by
/// `2 / sum(window)` (half that at DC and Nyquist), so an integer-bin tone of
/// amplitude A shows a peak of height A.
pub fn fft_amplitude_spectrum(
    series: &TimeSeries,
    window: SpectrumWindow,
    remove_mean: bool,
) -> Result<AmplitudeSpectrum> {
    let t = series.len();
    if t < 4 {
        return Err(Error::TooShort { len: t, min: 4 });
    }
    let mut samples = series.samples().to_vec();
    if remove_mean {
        let mean = samples.iter().sum::<f64>() / t as f64;
        for v in &mut samples {
            *v -= mean;
        }
    }
    let mut window_sum = 0.0;
    let mut buf: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = match window {
                SpectrumWindow::Rectangular => 1.0,
                SpectrumWindow::Hann => {
                    0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / t as f64).cos())
                }
            };
            window_sum += w;
            Complex64::new(x * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(t).process(&mut buf);
    let rate = series.sample_rate();
    let half = t / 2;
    let n_bins = half + 1;
    let mut frequencies = Vec::with_capacity(n_bins);
    let mut amplitudes = Vec::with_capacity(n_bins);
    for (k, v) in buf.iter().enumerate().take(n_bins) {
        let single_sided = k == 0 || (t.is_multiple_of(2) && k == half);
        let scale = if single_sided { 1.0 } else { 2.0 } / window_sum;
        frequencies.push(k as f64 * rate / t as f64);
        amplitudes.push(v.norm() * scale);
    }
    Ok(AmplitudeSpectrum {
        frequencies,
        amplitudes,
    })
}

/// Peak of an amplitude spectrum within a frequency band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCrest {
    pub frequency_hz: f64,
    pub amplitude: f64,
    /// Peak amplitude over the in-band median amplitude.
    pub prominence: f64,
}

/// Finds the highest bin in `[lo, hi]` Hz. `None` when the band is empty.
pub fn spectral_crest(spectrum: &AmplitudeSpectrum, band: (f64, f64)) -> Option<SpectralCrest> {
    let in_band: Vec<usize> = spectrum
        .frequencies
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= band.0 && f <= band.1)
        .map(|(k, _)| k)
        .collect();
    if in_band.is_empty() {
        return None;
    }
    let peak = *in_band
        .iter()
        .max_by(|&&a, &&b| spectrum.amplitudes[a].total_cmp(&spectrum.amplitudes[b]))?;
    let mut amps: Vec<f64> = in_band.iter().map(|&k| spectrum.amplitudes[k]).collect();
    amps.sort_by(f64::total_cmp);
    let median = amps[amps.len() / 2];
    let amplitude = spectrum.amplitudes[peak];
    Some(SpectralCrest {
        frequency_hz: spectrum.frequencies[peak],
        amplitude,
        prominence: if median > 0.0 {
            amplitude / median
        } else {
            f64::INFINITY
        },
    })
}

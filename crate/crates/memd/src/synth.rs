//! Deterministic synthetic multichannel scenarios with known mode content,
//! plus independent oracles used to validate the analysis pipeline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::modes::ModeCandidate;
use crate::signal::{build_record, MultichannelRecord};

/// One synthetic oscillation mode shared (or not) across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub frequency_hz: f64,
    /// 0 = sustained; positive values decay as `exp(-2 pi f zeta t)`.
    pub damping_ratio: f64,
    /// Per-channel (amplitude, phase radians) participation; length N.
    pub per_channel: Vec<(f64, f64)>,
    /// Mode starts contributing at this time (seconds).
    pub onset_s: f64,
}

/// A step change applied to every channel at one instant, emulating the
/// frequency excursion of a generation trip.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent {
    pub time_s: f64,
    pub magnitudes: Vec<f64>,
}

/// Full scenario: modes, per-channel polynomial trends, optional noise and
/// step event. The seed fixes all randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub n_channels: usize,
    pub modes: Vec<ModeSpec>,
    /// Per-channel polynomial trend coefficients in ascending powers of t;
    /// empty for no trend.
    pub trend: Vec<Vec<f64>>,
    /// Target SNR of white Gaussian noise against the pooled mode power.
    pub noise_snr_db: Option<f64>,
    /// Optional single-pole low-pass cutoff applied to the noise.
    pub noise_lowpass_hz: Option<f64>,
    pub step_event: Option<StepEvent>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    fn validate(&self) -> Result<()> {
        let fail = |reason: &str| -> Result<()> {
            Err(Error::BadScenario {
                reason: reason.to_string(),
            })
        };
        if self.n_channels == 0 {
            return fail("n_channels must be positive");
        }
        if !self.sample_rate.is_finite() || self.sample_rate <= 0.0 {
            return fail("sample_rate must be positive");
        }
        if self.duration_s * self.sample_rate < 4.0 {
            return fail("duration * sample_rate must be at least 4 samples");
        }
        for (i, mode) in self.modes.iter().enumerate() {
            if !mode.frequency_hz.is_finite() || mode.frequency_hz <= 0.0 {
                return fail(&format!("mode {} frequency must be positive", i + 1));
            }
            if mode.per_channel.len() != self.n_channels {
                return fail(&format!(
                    "mode {} has {} channel entries, expected {}",
                    i + 1,
                    mode.per_channel.len(),
                    self.n_channels
                ));
            }
            if mode.per_channel.iter().any(|&(a, _)| a < 0.0) {
                return fail(&format!("mode {} has a negative amplitude", i + 1));
            }
        }
        if !self.trend.is_empty() && self.trend.len() != self.n_channels {
            return fail("trend coefficient lists must cover every channel");
        }
        if let Some(step) = &self.step_event {
            if step.magnitudes.len() != self.n_channels {
                return fail("step magnitudes must cover every channel");
            }
        }
        if self.noise_snr_db.is_some()
            && self
                .modes
                .iter()
                .all(|m| m.per_channel.iter().all(|&(a, _)| a == 0.0))
        {
            return fail("noise SNR is defined against mode power, but no mode carries amplitude");
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate).round() as usize
    }
}

/// Renders a scenario into a record. The ground-truth scenario is echoed
/// back so downstream recovery checks carry their provenance.
///
/// Channel n is the mode sum plus trend, step, and Gaussian noise scaled so
/// the pooled mode power to noise power ratio hits the requested SNR.
pub fn generate(scenario: &ScenarioSpec) -> Result<(MultichannelRecord, ScenarioSpec)> {
    scenario.validate()?;
    let n = scenario.n_channels;
    let t_len = scenario.n_samples();
    let dt = 1.0 / scenario.sample_rate;

    let mut channels = vec![vec![0.0f64; t_len]; n];
    let mut mode_power_sum = 0.0;
    for (ch_idx, channel) in channels.iter_mut().enumerate() {
        for (i, value) in channel.iter_mut().enumerate() {
            let t = i as f64 * dt;
            let mut mode_sum = 0.0;
            for mode in &scenario.modes {
                if t < mode.onset_s {
                    continue;
                }
                let (amp, phase) = mode.per_channel[ch_idx];
                let tau = t - mode.onset_s;
                let envelope =
                    (-2.0 * std::f64::consts::PI * mode.frequency_hz * mode.damping_ratio * tau)
                        .exp();
                mode_sum += amp
                    * envelope
                    * (2.0 * std::f64::consts::PI * mode.frequency_hz * tau + phase).sin();
            }
            mode_power_sum += mode_sum * mode_sum;
            *value = mode_sum;
            if let Some(coeffs) = scenario.trend.get(ch_idx) {
                let mut poly = 0.0;
                for &c in coeffs.iter().rev() {
                    poly = poly * t + c;
                }
                *value += poly;
            }
            if let Some(step) = &scenario.step_event {
                if t >= step.time_s {
                    *value += step.magnitudes[ch_idx];
                }
            }
        }
    }

    if let Some(snr_db) = scenario.noise_snr_db {
        let mode_power = mode_power_sum / (n * t_len) as f64;
        let noise_power = mode_power / 10f64.powf(snr_db / 10.0);
        let sigma = noise_power.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        for channel in channels.iter_mut() {
            let mut noise: Vec<f64> = (0..t_len)
                .map(|_| {
                    sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            if let Some(cutoff) = scenario.noise_lowpass_hz {
                let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff);
                let alpha = dt / (rc + dt);
                let mut acc = 0.0;
                for v in noise.iter_mut() {
                    acc += alpha * (*v - acc);
                    *v = acc;
                }
                // Rescale the filtered block back to the target power.
                let actual = (noise.iter().map(|v| v * v).sum::<f64>() / t_len as f64).sqrt();
                if actual > 0.0 {
                    let k = sigma / actual;
                    for v in noise.iter_mut() {
                        *v *= k;
                    }
                }
            }
            for (v, w) in channel.iter_mut().zip(&noise) {
                *v += w;
            }
        }
    }

    let ids = (1..=n).map(|i| format!("ch{i:02}")).collect();
    let record = build_record(channels, scenario.sample_rate, ids)?;
    Ok((record, scenario.clone()))
}

/// Frequency estimate from zero-crossing spacing: `(crossings - 1) / (2 *
/// span)` with linearly interpolated crossing times, after mean removal.
pub fn oracle_zero_crossing_frequency(samples: &[f64], sample_rate: f64) -> Result<f64> {
    const MIN_CROSSINGS: usize = 4;
    let t_len = samples.len();
    let mean = samples.iter().sum::<f64>() / t_len as f64;
    let centered: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    // Crossings between nonzero samples of opposite sign, interpolated
    // across any exact zeros in between.
    let mut crossings: Vec<f64> = Vec::new();
    let mut prev_sign = 0i8;
    let mut prev_idx = 0usize;
    for (i, &v) in centered.iter().enumerate() {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            continue;
        };
        if prev_sign != 0 && sign != prev_sign {
            let a = centered[prev_idx];
            crossings.push(prev_idx as f64 + (i - prev_idx) as f64 * a / (a - v));
        }
        prev_sign = sign;
        prev_idx = i;
    }
    if crossings.len() < MIN_CROSSINGS {
        return Err(Error::TooFewCrossings {
            count: crossings.len(),
            min: MIN_CROSSINGS,
        });
    }
    let span = (crossings.last().unwrap() - crossings[0]) / sample_rate;
    Ok((crossings.len() as f64 - 1.0) / (2.0 * span))
}

/// Fraction of non-DC spectral energy inside `[lo, hi]` Hz. This is the
/// band-energy oracle used to check which IMF carries which mode.
pub fn band_energy_fraction(samples: &[f64], sample_rate: f64, lo: f64, hi: f64) -> f64 {
    let t = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(t).process(&mut buf);
    let mut total = 0.0;
    let mut band = 0.0;
    for (k, v) in buf.iter().enumerate().take(t / 2 + 1).skip(1) {
        let f = k as f64 * sample_rate / t as f64;
        let p = v.norm_sqr();
        total += p;
        if f >= lo && f <= hi {
            band += p;
        }
    }
    if total > 0.0 {
        band / total
    } else {
        0.0
    }
}

/// Outcome of matching one ground-truth mode against ranked candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRecovery {
    pub truth_frequency_hz: f64,
    /// Matched candidate; `None` means the mode was missed.
    pub matched: Option<RecoveredMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredMode {
    pub imf_index: usize,
    pub candidate_frequency_hz: f64,
    pub frequency_error_hz: f64,
    /// Position in the ranked list (0 = dominant).
    pub rank: usize,
}

/// Greedy nearest-frequency matching between ground-truth modes and ranked
/// candidates. Each candidate matches at most one mode; leftover modes are
/// flagged missed.
pub fn recovery_report(ground_truth: &ScenarioSpec, ranked: &[ModeCandidate]) -> Vec<ModeRecovery> {
    let truth: Vec<f64> = ground_truth.modes.iter().map(|m| m.frequency_hz).collect();
    let candidates: Vec<(usize, f64)> = ranked
        .iter()
        .enumerate()
        .filter_map(|(rank, c)| c.median_joint_frequency_hz.map(|f| (rank, f)))
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, &tf) in truth.iter().enumerate() {
        for (ci, &(_, cf)) in candidates.iter().enumerate() {
            pairs.push(((tf - cf).abs(), ti, ci));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut matched_truth = vec![None; truth.len()];
    let mut used_candidate = vec![false; candidates.len()];
    for (err, ti, ci) in pairs {
        if matched_truth[ti].is_some() || used_candidate[ci] {
            continue;
        }
        used_candidate[ci] = true;
        let (rank, freq) = candidates[ci];
        matched_truth[ti] = Some(RecoveredMode {
            imf_index: ranked[rank].imf_index,
            candidate_frequency_hz: freq,
            frequency_error_hz: err,
            rank,
        });
    }
    truth
        .into_iter()
        .zip(matched_truth)
        .map(|(truth_frequency_hz, matched)| ModeRecovery {
            truth_frequency_hz,
            matched,
        })
        .collect()
}

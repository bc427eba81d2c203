//! Hilbert transform, analytic traces (instantaneous amplitude, phase, and
//! frequency), and joint cross-channel traces per IMF.
//!
//! Phase comes from the four-quadrant angle of the analytic pair; the
//! two-quadrant arcsin form is ambiguous in the left half-plane. Instantaneous
//! frequency is the central difference of the unwrapped phase. Samples whose
//! amplitude falls below a floor of `1e-6 * rms` carry no meaningful phase and
//! are marked undefined (NaN).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{ImfSet, TimeSeries};

/// Minimum length for the discrete transform.
pub const MIN_HILBERT_LEN: usize = 8;

/// Fraction of samples at each record edge treated as low-confidence for
/// instantaneous-frequency statistics (Gibbs effects of the discrete
/// transform).
pub const EDGE_FRACTION: f64 = 0.05;

/// Relative amplitude floor below which phase and frequency are undefined.
pub const AMPLITUDE_FLOOR_REL: f64 = 1e-6;

/// Discrete Hilbert transform via the frequency-domain analytic-signal
/// method: zero the negative frequencies, double the positive ones, invert,
/// and take the imaginary part.
pub fn hilbert_transform(series: &TimeSeries) -> Result<TimeSeries> {
    let samples = series.samples();
    let imag = hilbert_transform_raw(samples)?;
    series.with_samples(imag)
}

pub(crate) fn analytic_signal_raw(samples: &[f64]) -> Result<Vec<Complex64>> {
    let t = samples.len();
    if t < MIN_HILBERT_LEN {
        return Err(Error::TooShort {
            len: t,
            min: MIN_HILBERT_LEN,
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(t).process(&mut buf);
    // Analytic-signal gains: keep DC (and Nyquist for even T), double the
    // positive frequencies, null the negative half.
    let half = t / 2;
    if t.is_multiple_of(2) {
        for v in buf.iter_mut().take(half).skip(1) {
            *v *= 2.0;
        }
        for v in buf.iter_mut().skip(half + 1) {
            *v = Complex64::new(0.0, 0.0);
        }
    } else {
        for v in buf.iter_mut().take(half + 1).skip(1) {
            *v *= 2.0;
        }
        for v in buf.iter_mut().skip(half + 1) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(t).process(&mut buf);
    let scale = 1.0 / t as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(buf)
}

pub(crate) fn hilbert_transform_raw(samples: &[f64]) -> Result<Vec<f64>> {
    Ok(analytic_signal_raw(samples)?
        .into_iter()
        .map(|z| z.im)
        .collect())
}

/// Instantaneous amplitude, unwrapped phase, and frequency of one series.
///
/// `phase` and `inst_frequency` are NaN where the amplitude sits below the
/// floor. Frequencies are in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticTrace {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub inst_frequency: Vec<f64>,
}

impl AnalyticTrace {
    /// Index range excluding the low-confidence edges.
    pub fn interior_range(&self) -> std::ops::Range<usize> {
        interior_range(self.amplitude.len())
    }
}

/// Index range with `EDGE_FRACTION` trimmed from each end.
pub fn interior_range(len: usize) -> std::ops::Range<usize> {
    let margin = (len as f64 * EDGE_FRACTION).floor() as usize;
    margin..len - margin
}

fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let two_pi = 2.0 * pi;
    let mut out = Vec::with_capacity(raw.len());
    out.push(raw[0]);
    for i in 1..raw.len() {
        // Raw four-quadrant phases lie in (-pi, pi], so one correction maps
        // the step into (-pi, pi].
        let mut d = raw[i] - raw[i - 1];
        if d > pi {
            d -= two_pi;
        } else if d <= -pi {
            d += two_pi;
        }
        out.push(out[i - 1] + d);
    }
    out
}

struct RawTrace {
    amplitude: Vec<f64>,
    phase: Vec<f64>,
    frequency: Vec<f64>,
    floor: f64,
}

fn analytic_trace_raw(samples: &[f64], sample_rate: f64) -> Result<RawTrace> {
    let analytic = analytic_signal_raw(samples)?;
    let t = samples.len();
    let amplitude: Vec<f64> = analytic
        .iter()
        .map(|z| (z.re * z.re + z.im * z.im).sqrt())
        .collect();
    let raw_phase: Vec<f64> = analytic.iter().map(|z| z.im.atan2(z.re)).collect();
    let phase = unwrap_phases(&raw_phase);
    let two_pi_dt = 2.0 * std::f64::consts::PI / sample_rate;
    let mut frequency = Vec::with_capacity(t);
    frequency.push((phase[1] - phase[0]) / two_pi_dt);
    for i in 1..t - 1 {
        frequency.push((phase[i + 1] - phase[i - 1]) / (2.0 * two_pi_dt));
    }
    frequency.push((phase[t - 1] - phase[t - 2]) / two_pi_dt);
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / t as f64).sqrt();
    Ok(RawTrace {
        amplitude,
        phase,
        frequency,
        floor: AMPLITUDE_FLOOR_REL * rms,
    })
}

/// Analytic trace of one series, with sub-floor samples marked undefined.
pub fn analytic_trace(series: &TimeSeries) -> Result<AnalyticTrace> {
    let raw = analytic_trace_raw(series.samples(), series.sample_rate())?;
    let mut phase = raw.phase;
    let mut frequency = raw.frequency;
    for (i, &a) in raw.amplitude.iter().enumerate() {
        if a <= raw.floor {
            phase[i] = f64::NAN;
            frequency[i] = f64::NAN;
        }
    }
    Ok(AnalyticTrace {
        amplitude: raw.amplitude,
        phase,
        inst_frequency: frequency,
    })
}

/// Amplitude-weighted joint frequency and mean joint amplitude of one IMF
/// across channels. `joint_frequency` is NaN where the summed amplitude falls
/// below the pooled floor or no channel carries a defined frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModeTrace {
    pub joint_frequency: Vec<f64>,
    pub joint_amplitude: Vec<f64>,
}

impl JointModeTrace {
    pub fn interior_range(&self) -> std::ops::Range<usize> {
        interior_range(self.joint_amplitude.len())
    }

    /// Median of the defined joint-frequency samples over the interior.
    pub fn median_interior_frequency(&self) -> Option<f64> {
        let range = self.interior_range();
        let mut vals: Vec<f64> = self.joint_frequency[range]
            .iter()
            .copied()
            .filter(|f| f.is_finite())
            .collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(f64::total_cmp);
        Some(vals[vals.len() / 2])
    }

    /// Mean joint amplitude over all samples.
    pub fn mean_amplitude(&self) -> f64 {
        self.joint_amplitude.iter().sum::<f64>() / self.joint_amplitude.len() as f64
    }
}

/// Combines per-channel analytic traces into the joint trace.
///
/// The weighted frequency mean is evaluated relative to the first channel
/// with a defined frequency, which keeps the degenerate all-equal case exact.
/// Channels whose own frequency is undefined contribute only floor-level
/// weight and are skipped.
pub fn joint_trace_from_traces(traces: &[AnalyticTrace], pooled_rms: f64) -> JointModeTrace {
    let n = traces.len();
    let t = traces[0].amplitude.len();
    let floor = AMPLITUDE_FLOOR_REL * pooled_rms;
    let mut joint_frequency = Vec::with_capacity(t);
    let mut joint_amplitude = Vec::with_capacity(t);
    for i in 0..t {
        let mut amp_sum_all = 0.0;
        for tr in traces {
            amp_sum_all += tr.amplitude[i];
        }
        joint_amplitude.push(amp_sum_all / n as f64);

        let mut reference = f64::NAN;
        let mut weight_sum = 0.0;
        let mut weighted_offset = 0.0;
        for tr in traces {
            let f = tr.inst_frequency[i];
            if !f.is_finite() {
                continue;
            }
            if !reference.is_finite() {
                reference = f;
            }
            weight_sum += tr.amplitude[i];
            weighted_offset += tr.amplitude[i] * (f - reference);
        }
        if !reference.is_finite() || amp_sum_all <= floor || weight_sum == 0.0 {
            joint_frequency.push(f64::NAN);
        } else {
            joint_frequency.push(reference + weighted_offset / weight_sum);
        }
    }
    JointModeTrace {
        joint_frequency,
        joint_amplitude,
    }
}

fn pooled_rms(channels: &[TimeSeries]) -> f64 {
    let mean_sq = channels
        .iter()
        .map(|c| {
            let r = c.rms();
            r * r
        })
        .sum::<f64>()
        / channels.len() as f64;
    mean_sq.sqrt()
}

/// Joint instantaneous frequency and amplitude of IMF `imf_index`.
pub fn joint_mode_trace(imf_index: usize, imf_set: &ImfSet) -> Result<JointModeTrace> {
    let channels = imf_set.imf(imf_index)?;
    let traces = channels
        .iter()
        .map(analytic_trace)
        .collect::<Result<Vec<_>>>()?;
    Ok(joint_trace_from_traces(&traces, pooled_rms(channels)))
}

/// Per-channel and joint traces for every IMF of a set, computed once and
/// shared by the mode-analysis stage.
#[derive(Debug, Clone)]
pub struct ImfTraces {
    /// `per_channel[m][n]` is the trace of IMF m in channel n.
    pub per_channel: Vec<Vec<AnalyticTrace>>,
    /// One joint trace per IMF.
    pub joint: Vec<JointModeTrace>,
}

impl ImfTraces {
    pub fn compute(imf_set: &ImfSet) -> Result<Self> {
        let mut per_channel = Vec::with_capacity(imf_set.n_imfs());
        let mut joint = Vec::with_capacity(imf_set.n_imfs());
        for m in 0..imf_set.n_imfs() {
            let channels = imf_set.imf(m)?;
            let traces = channels
                .iter()
                .map(analytic_trace)
                .collect::<Result<Vec<_>>>()?;
            joint.push(joint_trace_from_traces(&traces, pooled_rms(channels)));
            per_channel.push(traces);
        }
        Ok(Self { per_channel, joint })
    }

    pub fn n_imfs(&self) -> usize {
        self.joint.len()
    }
}

/// Flattened (time, frequency, amplitude) samples of the joint traces for the
/// requested IMFs, for plotting. Low-confidence edge samples and undefined
/// frequencies are omitted.
pub fn hilbert_spectrum(
    imf_set: &ImfSet,
    imf_range: std::ops::Range<usize>,
) -> Result<Vec<Vec<(f64, f64, f64)>>> {
    let mut out = Vec::new();
    for m in imf_range {
        let trace = joint_mode_trace(m, imf_set)?;
        let t0 = imf_set.residue()[0].t0();
        let dt = 1.0 / imf_set.sample_rate();
        let samples = trace
            .interior_range()
            .filter(|&i| trace.joint_frequency[i].is_finite())
            .map(|i| {
                (
                    t0 + i as f64 * dt,
                    trace.joint_frequency[i],
                    trace.joint_amplitude[i],
                )
            })
            .collect();
        out.push(samples);
    }
    Ok(out)
}

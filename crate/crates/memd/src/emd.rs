//! Univariate empirical mode decomposition: the sifting loop, the normalized
//! square deviation stop criterion, and the outer IMF-extraction loop.

use crate::envelope::envelope_mean_univariate;
use crate::error::{Error, Result};
use crate::signal::{DecompositionConfig, DecompositionWarning, ImfSet, TimeSeries};

/// Progress of one sifting chain.
#[derive(Debug, Clone)]
pub struct SiftState {
    /// The signal currently being sifted.
    pub current: TimeSeries,
    /// Completed sift passes.
    pub iteration: usize,
    /// Deviation between the last two sifted signals, once available.
    pub last_sd: Option<f64>,
}

/// Guard for the vanishing denominator in the SD criterion; the pointwise
/// ratio is singular wherever the previous sift is zero.
pub(crate) fn sd_epsilon(prev: &[f64]) -> f64 {
    let n = prev.len() as f64;
    let mean_sq = prev.iter().map(|v| v * v).sum::<f64>() / n;
    (1e-12 * mean_sq).max(1e-300)
}

/// Normalized square deviation between two successive sifted signals:
/// `sum_t |curr[t] - prev[t]|^2 / (prev[t]^2 + epsilon)`.
///
/// Comparing the result against the configured threshold is the caller's job.
pub fn sd_criterion(prev: &TimeSeries, curr: &TimeSeries, epsilon: f64) -> Result<f64> {
    sd_criterion_raw(prev.samples(), curr.samples(), epsilon)
}

pub(crate) fn sd_criterion_raw(prev: &[f64], curr: &[f64], epsilon: f64) -> Result<f64> {
    if prev.len() != curr.len() {
        return Err(Error::LengthMismatch {
            expected: prev.len(),
            actual: curr.len(),
        });
    }
    Ok(prev
        .iter()
        .zip(curr)
        .map(|(p, c)| {
            let d = c - p;
            d * d / (p * p + epsilon)
        })
        .sum())
}

/// One sifting pass: subtracts the envelope mean from the signal.
pub fn sift_once(series: &TimeSeries, config: &DecompositionConfig) -> Result<TimeSeries> {
    let mean = envelope_mean_univariate(series, config)?;
    let sifted = series
        .samples()
        .iter()
        .zip(&mean.values)
        .map(|(s, m)| s - m)
        .collect();
    series.with_samples(sifted)
}

/// Sifts until the SD criterion drops below `config.sd_threshold` or the
/// iteration cap is reached (`exhausted = true` flags the cap).
///
/// `InsufficientExtrema` on the very first pass means the signal is already
/// monotonic and the caller should stop extracting IMFs. If the signal loses
/// its extrema mid-chain, the current sift result is returned as the IMF.
pub fn sift_to_imf(
    series: &TimeSeries,
    config: &DecompositionConfig,
) -> Result<(TimeSeries, bool)> {
    let mut state = SiftState {
        current: series.clone(),
        iteration: 0,
        last_sd: None,
    };
    while state.iteration < config.max_sift_iterations {
        let next = match sift_once(&state.current, config) {
            Ok(next) => next,
            Err(e @ Error::InsufficientExtrema { .. }) => {
                if state.iteration == 0 {
                    return Err(e);
                }
                return Ok((state.current, false));
            }
            Err(e) => return Err(e),
        };
        let eps = sd_epsilon(state.current.samples());
        let sd = sd_criterion(&state.current, &next, eps)?;
        state.current = next;
        state.iteration += 1;
        state.last_sd = Some(sd);
        if sd <= config.sd_threshold {
            return Ok((state.current, false));
        }
    }
    Ok((state.current, true))
}

/// Extracts IMFs from a single channel until the residue is monotonic or the
/// IMF cap is reached. Degenerate inputs yield zero IMFs with the input as
/// residue.
pub fn emd_decompose(series: &TimeSeries, config: &DecompositionConfig) -> Result<ImfSet> {
    let mut residue = series.clone();
    let mut imfs: Vec<Vec<TimeSeries>> = Vec::new();
    let mut warnings = Vec::new();
    while imfs.len() < config.max_imfs {
        match sift_to_imf(&residue, config) {
            Ok((imf, exhausted)) => {
                if exhausted {
                    warnings.push(DecompositionWarning::SiftIterationCap {
                        imf_index: imfs.len(),
                    });
                }
                let remaining = residue
                    .samples()
                    .iter()
                    .zip(imf.samples())
                    .map(|(r, i)| r - i)
                    .collect();
                residue = residue.with_samples(remaining)?;
                imfs.push(vec![imf]);
            }
            Err(Error::InsufficientExtrema { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    ImfSet::new(imfs, vec![residue], vec!["ch1".to_string()], warnings)
}

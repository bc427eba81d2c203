//! Extrema detection, mirror boundary extension, and cubic-spline envelope
//! construction. Every decomposition variant builds its envelopes here.

use crate::error::{Error, Result};
use crate::signal::{DecompositionConfig, TimeSeries};

/// Extrema mirrored at each end before splining. Unextended splines swing
/// wildly at the record edges.
pub const N_MIRROR: usize = 2;

/// How runs of equal samples are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlateauPolicy {
    /// A flat run bounded by lower (higher) neighbors yields one maximum
    /// (minimum) at the run's first index.
    #[default]
    FirstOfPlateau,
}

/// Local maxima and minima of a series. Indices are `i64` so that mirrored
/// knots may sit before index 0 or past the last sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaSet {
    /// (index, value) pairs, indices strictly increasing.
    pub maxima: Vec<(i64, f64)>,
    /// (index, value) pairs, indices strictly increasing.
    pub minima: Vec<(i64, f64)>,
}

impl ExtremaSet {
    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty() && self.minima.is_empty()
    }

    /// Total extrema count (maxima plus minima).
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// An evaluated envelope: one value per sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCurve {
    pub values: Vec<f64>,
}

/// Finds all strict interior local extrema of `samples`.
///
/// Endpoints are never reported. A plateau (run of equal samples) bounded on
/// both sides is reported once, at the run's first index.
pub fn find_extrema_in(samples: &[f64], _policy: PlateauPolicy) -> ExtremaSet {
    let n = samples.len();
    let mut out = ExtremaSet::default();
    if n < 3 {
        return out;
    }
    let mut start = 0usize;
    while start < n {
        let mut end = start;
        while end + 1 < n && samples[end + 1] == samples[start] {
            end += 1;
        }
        // Run [start, end] of equal values; interior runs only.
        if start > 0 && end + 1 < n {
            let v = samples[start];
            let left = samples[start - 1];
            let right = samples[end + 1];
            if left < v && right < v {
                out.maxima.push((start as i64, v));
            } else if left > v && right > v {
                out.minima.push((start as i64, v));
            }
        }
        start = end + 1;
    }
    out
}

/// [`find_extrema_in`] on a validated series.
pub fn find_extrema(series: &TimeSeries, policy: PlateauPolicy) -> ExtremaSet {
    find_extrema_in(series.samples(), policy)
}

/// Mirrors up to `n_mirror` knot indices about each end of `[0, t_last]`.
///
/// Returns `(virtual_index, source_position)` pairs covering the reflected
/// prefix, the original knots, and the reflected suffix, with strictly
/// increasing virtual indices. `source_position` points into `times`, so the
/// caller can attach per-channel values to the mirrored knots.
pub(crate) fn mirror_knot_times(times: &[i64], t_last: i64, n_mirror: usize) -> Vec<(i64, usize)> {
    let mut out = Vec::with_capacity(times.len() + 2 * n_mirror);
    let first = times[0];
    let last = *times.last().expect("non-empty knot list");
    // Left reflections of the knots nearest index 0, in ascending order.
    for (i, &t) in times.iter().enumerate().take(n_mirror.min(times.len())) {
        let reflected = -t;
        if reflected < first {
            out.push((reflected, i));
        }
    }
    out.sort_unstable();
    for (i, &t) in times.iter().enumerate() {
        out.push((t, i));
    }
    // Right reflections of the knots nearest the end.
    let tail_start = times.len().saturating_sub(n_mirror);
    let mut right: Vec<(i64, usize)> = times
        .iter()
        .enumerate()
        .skip(tail_start)
        .filter_map(|(i, &t)| {
            let reflected = 2 * t_last - t;
            (reflected > last).then_some((reflected, i))
        })
        .collect();
    right.sort_unstable();
    out.extend(right);
    out
}

fn mirror_value_knots(knots: &[(i64, f64)], t_last: i64, n_mirror: usize) -> Vec<(i64, f64)> {
    let times: Vec<i64> = knots.iter().map(|&(t, _)| t).collect();
    mirror_knot_times(&times, t_last, n_mirror)
        .into_iter()
        .map(|(t, src)| (t, knots[src].1))
        .collect()
}

/// Augments `extrema` with `n_mirror` mirror-reflected extrema beyond each
/// end of the series. The virtual knots keep their original values; only the
/// indices are reflected (about 0 on the left, about `T - 1` on the right).
pub fn extend_boundaries(
    series: &TimeSeries,
    extrema: &ExtremaSet,
    n_mirror: usize,
) -> Result<ExtremaSet> {
    if extrema.is_empty() {
        return Err(Error::InsufficientExtrema {
            maxima: 0,
            minima: 0,
        });
    }
    let t_last = (series.len() - 1) as i64;
    let mut out = ExtremaSet::default();
    if !extrema.maxima.is_empty() {
        out.maxima = mirror_value_knots(&extrema.maxima, t_last, n_mirror);
    }
    if !extrema.minima.is_empty() {
        out.minima = mirror_value_knots(&extrema.minima, t_last, n_mirror);
    }
    Ok(out)
}

/// Natural cubic spline through `knots`, evaluated at indices `0..eval_length`.
///
/// Knot indices must be strictly increasing and should span the evaluation
/// range (boundary extension guarantees this in the sifting loops). Two knots
/// degrade to linear interpolation and three to the unique parabola, keeping
/// the sifting loop total on degenerate inputs.
pub fn spline_envelope(knots: &[(i64, f64)], eval_length: usize) -> Result<EnvelopeCurve> {
    if knots.len() < 2 {
        return Err(Error::TooFewKnots { count: knots.len() });
    }
    for pair in knots.windows(2) {
        if pair[1].0 == pair[0].0 {
            return Err(Error::DuplicateKnotIndex { index: pair[0].0 });
        }
        if pair[1].0 < pair[0].0 {
            return Err(Error::DuplicateKnotIndex { index: pair[1].0 });
        }
    }
    let xs: Vec<f64> = knots.iter().map(|&(t, _)| t as f64).collect();
    let ys: Vec<f64> = knots.iter().map(|&(_, v)| v).collect();
    let values = match knots.len() {
        2 => eval_linear(&xs, &ys, eval_length),
        3 => eval_parabola(&xs, &ys, eval_length),
        _ => eval_natural_spline(&xs, &ys, eval_length),
    };
    Ok(EnvelopeCurve { values })
}

fn eval_linear(xs: &[f64], ys: &[f64], eval_length: usize) -> Vec<f64> {
    let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    (0..eval_length)
        .map(|t| ys[0] + slope * (t as f64 - xs[0]))
        .collect()
}

fn eval_parabola(xs: &[f64], ys: &[f64], eval_length: usize) -> Vec<f64> {
    // Lagrange form of the unique parabola through three points.
    let (x0, x1, x2) = (xs[0], xs[1], xs[2]);
    let (y0, y1, y2) = (ys[0], ys[1], ys[2]);
    let d0 = (x0 - x1) * (x0 - x2);
    let d1 = (x1 - x0) * (x1 - x2);
    let d2 = (x2 - x0) * (x2 - x1);
    (0..eval_length)
        .map(|t| {
            let x = t as f64;
            y0 * (x - x1) * (x - x2) / d0
                + y1 * (x - x0) * (x - x2) / d1
                + y2 * (x - x0) * (x - x1) / d2
        })
        .collect()
}

/// Natural spline: second derivative zero at the first and last knot.
/// Second-derivative values come from the standard tridiagonal system solved
/// with the Thomas algorithm; evaluation walks the (sorted) sample indices
/// with a segment cursor.
fn eval_natural_spline(xs: &[f64], ys: &[f64], eval_length: usize) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

    // Interior equations: h[i-1]*m[i-1] + 2(h[i-1]+h[i])*m[i] + h[i]*m[i+1] = rhs[i]
    let dim = n - 2;
    let mut diag = vec![0.0; dim];
    let mut rhs = vec![0.0; dim];
    for i in 1..n - 1 {
        diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
        rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    // Thomas forward sweep (sub/super diagonals are h[1..n-2]).
    for i in 1..dim {
        let w = h[i] / diag[i - 1];
        diag[i] -= w * h[i];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    if dim > 0 {
        m[n - 2] = rhs[dim - 1] / diag[dim - 1];
        for i in (1..n - 2).rev() {
            m[i] = (rhs[i - 1] - h[i] * m[i + 1]) / diag[i - 1];
        }
    }

    let mut out = Vec::with_capacity(eval_length);
    let mut seg = 0usize;
    for t in 0..eval_length {
        let x = t as f64;
        while seg + 2 < n && x > xs[seg + 1] {
            seg += 1;
        }
        let hx = h[seg];
        let a = (xs[seg + 1] - x) / hx;
        let b = (x - xs[seg]) / hx;
        let cubic = ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * hx * hx / 6.0;
        out.push(a * ys[seg] + b * ys[seg + 1] + cubic);
    }
    out
}

/// Builds the mirrored spline envelope through one extremum list.
pub(crate) fn extended_envelope(
    series_len: usize,
    knots: &[(i64, f64)],
    n_mirror: usize,
) -> Result<EnvelopeCurve> {
    let extended = mirror_value_knots(knots, (series_len - 1) as i64, n_mirror);
    spline_envelope(&extended, series_len)
}

/// Pointwise mean of the upper (maxima) and lower (minima) spline envelopes,
/// both built with mirror boundary extension.
///
/// Fails with `InsufficientExtrema` when the series has fewer than two maxima
/// or two minima — the signal is treated as monotonic and the outer
/// decomposition loop stops.
pub fn envelope_mean_univariate(
    series: &TimeSeries,
    _config: &DecompositionConfig,
) -> Result<EnvelopeCurve> {
    let extrema = find_extrema(series, PlateauPolicy::FirstOfPlateau);
    if extrema.maxima.len() < 2 || extrema.minima.len() < 2 {
        return Err(Error::InsufficientExtrema {
            maxima: extrema.maxima.len(),
            minima: extrema.minima.len(),
        });
    }
    let upper = extended_envelope(series.len(), &extrema.maxima, N_MIRROR)?;
    let lower = extended_envelope(series.len(), &extrema.minima, N_MIRROR)?;
    let values = upper
        .values
        .iter()
        .zip(&lower.values)
        .map(|(u, l)| 0.5 * (u + l))
        .collect();
    Ok(EnvelopeCurve { values })
}

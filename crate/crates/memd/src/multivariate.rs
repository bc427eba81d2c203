//! Multivariate empirical mode decomposition.
//!
//! A multichannel record is projected onto a set of unit direction vectors;
//! the projection maxima define per-channel spline envelopes whose average is
//! the multivariate envelope mean. Sifting subtracts that mean until the
//! multichannel SD criterion is met. The bivariate and trivariate variants
//! are the n=2 and n=3 configurations of the same machinery, differing only
//! in how the direction set is generated and scaled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::emd::{emd_decompose, sd_criterion_raw, sd_epsilon};
use crate::envelope::{
    find_extrema_in, mirror_knot_times, spline_envelope, PlateauPolicy, N_MIRROR,
};
use crate::error::{Error, Result};
use crate::signal::{
    DecompositionConfig, DecompositionWarning, ImfSet, MultichannelRecord, TimeSeries,
};

/// How projection directions are laid out on the unit (N-1)-sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionScheme {
    /// Evenly spaced angles on the unit circle (2-channel records only).
    /// Envelope means under this scheme carry the bivariate 2/K factor.
    UniformAngles2D,
    /// Deterministic low-discrepancy point set: Hammersley points mapped
    /// through the Gaussian inverse CDF and normalized to unit length.
    LowDiscrepancySphere,
    /// Polar-angle grid on the 2-sphere (3-channel records only): the
    /// direction count must be a perfect square g*g, read as a g-by-g grid
    /// of polar and azimuthal angles.
    PolarGrid3D,
}

/// K unit vectors on the (N-1)-sphere along which a record is projected.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    vectors: Vec<Vec<f64>>,
    scheme: DirectionScheme,
    seed: u64,
}

impl DirectionSet {
    /// Validates dimensions (K >= 2N) and unit norms (within 1e-12).
    pub fn new(vectors: Vec<Vec<f64>>, scheme: DirectionScheme, seed: u64) -> Result<Self> {
        let k = vectors.len();
        if k == 0 {
            return Err(Error::TooFewDirections {
                count: 0,
                n_channels: 0,
                min: 1,
            });
        }
        let n = vectors[0].len();
        if k < 2 * n {
            return Err(Error::TooFewDirections {
                count: k,
                n_channels: n,
                min: 2 * n,
            });
        }
        for v in &vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::BadScheme {
                    reason: format!("direction vector norm {norm} deviates from 1"),
                });
            }
        }
        if scheme == DirectionScheme::UniformAngles2D && n != 2 {
            return Err(Error::BadScheme {
                reason: format!("UniformAngles2D requires 2 channels, got {n}"),
            });
        }
        if scheme == DirectionScheme::PolarGrid3D && n != 3 {
            return Err(Error::BadScheme {
                reason: format!("PolarGrid3D requires 3 channels, got {n}"),
            });
        }
        Ok(Self {
            vectors,
            scheme,
            seed,
        })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn scheme(&self) -> DirectionScheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.vectors[0].len()
    }
}

/// One projection of the record onto a direction vector. `direction_index`
/// identifies the row of the originating [`DirectionSet`]; standalone
/// projections built through [`project`] carry index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSeries {
    pub values: Vec<f64>,
    pub direction_index: usize,
}

/// Gaussian inverse CDF (Acklam's rational approximation, relative error
/// below 1.2e-9 over (0, 1)). Good enough for laying out directions; the
/// statistics crates would pull a dense-linear-algebra tree for this one
/// function.
#[allow(clippy::excessive_precision)]
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Van der Corput radical inverse of `k` in base `base`.
fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while k > 0 {
        denom *= base as f64;
        inv += (k % base) as f64 / denom;
        k /= base;
    }
    inv
}

const PRIMES: [usize; 11] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

/// Generates a direction set for an N-channel record.
///
/// `UniformAngles2D` places `(cos phi_k, sin phi_k)` at `phi_k = 2 pi k / K`.
/// `LowDiscrepancySphere` maps a seeded Hammersley point set through the
/// Gaussian inverse CDF and normalizes; the seed applies a deterministic
/// Cranley-Patterson shift so different seeds yield different sets.
/// `PolarGrid3D` builds the spherical grid `(sin t cos p, sin t sin p, cos t)`
/// over `t = k pi / g`, `p = n pi / g` with `g = sqrt(count)`.
pub fn generate_directions(
    n_channels: usize,
    count: usize,
    scheme: DirectionScheme,
    seed: u64,
) -> Result<DirectionSet> {
    if n_channels < 2 {
        return Err(Error::BadScheme {
            reason: format!("direction sets need at least 2 channels, got {n_channels}"),
        });
    }
    if count < 2 * n_channels {
        return Err(Error::TooFewDirections {
            count,
            n_channels,
            min: 2 * n_channels,
        });
    }
    let vectors = match scheme {
        DirectionScheme::UniformAngles2D => {
            if n_channels != 2 {
                return Err(Error::BadScheme {
                    reason: format!("UniformAngles2D requires 2 channels, got {n_channels}"),
                });
            }
            (1..=count)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                    vec![phi.cos(), phi.sin()]
                })
                .collect()
        }
        DirectionScheme::PolarGrid3D => {
            if n_channels != 3 {
                return Err(Error::BadScheme {
                    reason: format!("PolarGrid3D requires 3 channels, got {n_channels}"),
                });
            }
            let g = (count as f64).sqrt().round() as usize;
            if g * g != count {
                return Err(Error::BadScheme {
                    reason: format!("PolarGrid3D needs a square direction count, got {count}"),
                });
            }
            let mut vectors = Vec::with_capacity(count);
            for k in 1..=g {
                let theta = std::f64::consts::PI * k as f64 / g as f64;
                for n in 1..=g {
                    let phi = std::f64::consts::PI * n as f64 / g as f64;
                    vectors.push(vec![
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ]);
                }
            }
            vectors
        }
        DirectionScheme::LowDiscrepancySphere => {
            if n_channels > PRIMES.len() + 1 {
                return Err(Error::BadScheme {
                    reason: format!(
                        "LowDiscrepancySphere supports up to {} channels",
                        PRIMES.len() + 1
                    ),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shifts: Vec<f64> = (0..n_channels).map(|_| rng.random::<f64>()).collect();
            (0..count)
                .map(|k| {
                    let mut v: Vec<f64> = (0..n_channels)
                        .map(|j| {
                            let u = if j == 0 {
                                (k as f64 + 0.5) / count as f64
                            } else {
                                radical_inverse(k, PRIMES[j - 1])
                            };
                            let shifted = (u + shifts[j]).fract();
                            inverse_normal_cdf(shifted.clamp(1e-12, 1.0 - 1e-12))
                        })
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm < 1e-9 {
                        // All coordinates landed at the Gaussian median; pin
                        // to an axis rather than dividing by ~0.
                        v = std::iter::once(1.0)
                            .chain(std::iter::repeat(0.0))
                            .take(n_channels)
                            .collect();
                    } else {
                        for x in &mut v {
                            *x /= norm;
                        }
                        let renorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        for x in &mut v {
                            *x /= renorm;
                        }
                    }
                    v
                })
                .collect()
        }
    };
    DirectionSet::new(vectors, scheme, seed)
}

pub(crate) fn project_raw(channels: &[Vec<f64>], direction: &[f64]) -> Vec<f64> {
    let t_len = channels[0].len();
    let mut out = vec![0.0; t_len];
    for (d, ch) in direction.iter().zip(channels) {
        for (o, x) in out.iter_mut().zip(ch) {
            *o += d * x;
        }
    }
    out
}

/// Projects the record onto one unit direction: `p[t] = sum_n d[n] * x_n[t]`.
pub fn project(record: &MultichannelRecord, direction: &[f64]) -> Result<ProjectionSeries> {
    if direction.len() != record.n_channels() {
        return Err(Error::DimensionMismatch {
            expected: record.n_channels(),
            actual: direction.len(),
        });
    }
    let channels: Vec<Vec<f64>> = record
        .channels()
        .iter()
        .map(|c| c.samples().to_vec())
        .collect();
    Ok(ProjectionSeries {
        values: project_raw(&channels, direction),
        direction_index: 0,
    })
}

/// Multivariate envelope mean plus the number of directions skipped for
/// lacking projection maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateEnvelope {
    /// One mean curve per channel.
    pub channel_means: Vec<Vec<f64>>,
    /// Directions whose projection had fewer than two maxima.
    pub skipped_directions: usize,
}

/// Envelope of the record along one direction: spline each channel through
/// its samples at the projection-maxima times (mirror-extended). `None` when
/// the projection has fewer than two maxima.
fn directional_envelope(channels: &[Vec<f64>], direction: &[f64]) -> Option<Vec<Vec<f64>>> {
    let t_len = channels[0].len();
    let projection = project_raw(channels, direction);
    let extrema = find_extrema_in(&projection, PlateauPolicy::FirstOfPlateau);
    if extrema.maxima.len() < 2 {
        return None;
    }
    let times: Vec<i64> = extrema.maxima.iter().map(|&(t, _)| t).collect();
    let mirrored = mirror_knot_times(&times, (t_len - 1) as i64, N_MIRROR);
    let mut env = Vec::with_capacity(channels.len());
    for ch in channels {
        let knots: Vec<(i64, f64)> = mirrored
            .iter()
            .map(|&(t, src)| (t, ch[times[src] as usize]))
            .collect();
        let curve = spline_envelope(&knots, t_len).expect("mirrored knots are valid");
        env.push(curve.values);
    }
    Some(env)
}

pub(crate) fn envelope_mean_raw(
    channels: &[Vec<f64>],
    directions: &DirectionSet,
) -> Result<MultivariateEnvelope> {
    let n = channels.len();
    let t_len = channels[0].len();
    // Per-direction envelopes are independent; the reduction below runs in a
    // fixed direction order so results stay bitwise deterministic.
    let envelopes: Vec<Option<Vec<Vec<f64>>>> = directions
        .vectors()
        .par_iter()
        .map(|d| directional_envelope(channels, d))
        .collect();
    let mut sum = vec![vec![0.0; t_len]; n];
    let mut surviving = 0usize;
    for env in envelopes.iter().flatten() {
        surviving += 1;
        for (acc, curve) in sum.iter_mut().zip(env) {
            for (a, v) in acc.iter_mut().zip(curve) {
                *a += v;
            }
        }
    }
    if surviving == 0 {
        return Err(Error::AllDirectionsDegenerate {
            count: directions.len(),
        });
    }
    // Table-style scaling: the bivariate uniform-angle procedure averages
    // with 2/K; the general multivariate mean uses 1/K. Skipped directions
    // reduce the divisor.
    let scale = match directions.scheme() {
        DirectionScheme::UniformAngles2D => 2.0 / surviving as f64,
        _ => 1.0 / surviving as f64,
    };
    for curve in &mut sum {
        for v in curve.iter_mut() {
            *v *= scale;
        }
    }
    Ok(MultivariateEnvelope {
        channel_means: sum,
        skipped_directions: directions.len() - surviving,
    })
}

/// Multivariate envelope mean of a record (one curve per channel).
pub fn multivariate_envelope_mean(
    record: &MultichannelRecord,
    directions: &DirectionSet,
    _config: &DecompositionConfig,
) -> Result<MultivariateEnvelope> {
    if directions.n_channels() != record.n_channels() {
        return Err(Error::DimensionMismatch {
            expected: record.n_channels(),
            actual: directions.n_channels(),
        });
    }
    let channels: Vec<Vec<f64>> = record
        .channels()
        .iter()
        .map(|c| c.samples().to_vec())
        .collect();
    envelope_mean_raw(&channels, directions)
}

/// Multichannel SD criterion: the per-channel normalized square deviations
/// averaged over channels. Reduces to the univariate criterion at N = 1.
pub fn msd_criterion(prev: &[Vec<f64>], curr: &[Vec<f64>], epsilons: &[f64]) -> Result<f64> {
    if prev.len() != curr.len() || prev.len() != epsilons.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            actual: curr.len().min(epsilons.len()),
        });
    }
    let mut sum = 0.0;
    for ((p, c), &eps) in prev.iter().zip(curr).zip(epsilons) {
        sum += sd_criterion_raw(p, c, eps)?;
    }
    Ok(sum / prev.len() as f64)
}

struct RawSiftOutcome {
    imf: Vec<Vec<f64>>,
    exhausted: bool,
    skipped_passes: usize,
}

fn sift_to_imf_raw(
    channels: &[Vec<f64>],
    directions: &DirectionSet,
    config: &DecompositionConfig,
) -> Result<RawSiftOutcome> {
    let mut current: Vec<Vec<f64>> = channels.to_vec();
    let mut skipped_passes = 0usize;
    for iteration in 0..config.max_sift_iterations {
        let envelope = match envelope_mean_raw(&current, directions) {
            Ok(env) => env,
            Err(e @ Error::AllDirectionsDegenerate { .. }) => {
                if iteration == 0 {
                    return Err(e);
                }
                return Ok(RawSiftOutcome {
                    imf: current,
                    exhausted: false,
                    skipped_passes,
                });
            }
            Err(e) => return Err(e),
        };
        skipped_passes += envelope.skipped_directions;
        let next: Vec<Vec<f64>> = current
            .iter()
            .zip(&envelope.channel_means)
            .map(|(ch, mean)| ch.iter().zip(mean).map(|(x, m)| x - m).collect())
            .collect();
        let epsilons: Vec<f64> = current.iter().map(|ch| sd_epsilon(ch)).collect();
        let sd = msd_criterion(&current, &next, &epsilons)?;
        current = next;
        if sd <= config.sd_threshold {
            return Ok(RawSiftOutcome {
                imf: current,
                exhausted: false,
                skipped_passes,
            });
        }
    }
    Ok(RawSiftOutcome {
        imf: current,
        exhausted: true,
        skipped_passes,
    })
}

/// Sifts one aligned IMF out of the record. `exhausted = true` flags an
/// iteration-cap stop; `AllDirectionsDegenerate` on the first pass means the
/// record carries no further oscillatory content.
pub fn memd_sift_to_imf(
    record: &MultichannelRecord,
    directions: &DirectionSet,
    config: &DecompositionConfig,
) -> Result<(Vec<TimeSeries>, bool)> {
    let channels: Vec<Vec<f64>> = record
        .channels()
        .iter()
        .map(|c| c.samples().to_vec())
        .collect();
    let outcome = sift_to_imf_raw(&channels, directions, config)?;
    let series = outcome
        .imf
        .into_iter()
        .zip(record.channels())
        .map(|(samples, proto)| proto.with_samples(samples))
        .collect::<Result<Vec<_>>>()?;
    Ok((series, outcome.exhausted))
}

/// Outer stop: every projection of the residue has fewer than three extrema.
fn all_projections_exhausted(channels: &[Vec<f64>], directions: &DirectionSet) -> bool {
    directions.vectors().par_iter().all(|d| {
        let projection = project_raw(channels, d);
        find_extrema_in(&projection, PlateauPolicy::FirstOfPlateau).count() < 3
    })
}

/// MEMD with an explicit direction set. IMFs stay aligned across channels;
/// extraction stops when all residue projections have fewer than three
/// extrema or the IMF cap is reached.
pub fn memd_decompose_with_directions(
    record: &MultichannelRecord,
    directions: &DirectionSet,
    config: &DecompositionConfig,
) -> Result<ImfSet> {
    if directions.n_channels() != record.n_channels() {
        return Err(Error::DimensionMismatch {
            expected: record.n_channels(),
            actual: directions.n_channels(),
        });
    }
    let mut residue: Vec<Vec<f64>> = record
        .channels()
        .iter()
        .map(|c| c.samples().to_vec())
        .collect();
    let mut imfs: Vec<Vec<TimeSeries>> = Vec::new();
    let mut warnings = Vec::new();
    while imfs.len() < config.max_imfs {
        if all_projections_exhausted(&residue, directions) {
            break;
        }
        let outcome = match sift_to_imf_raw(&residue, directions, config) {
            Ok(o) => o,
            Err(Error::AllDirectionsDegenerate { .. }) => break,
            Err(e) => return Err(e),
        };
        if outcome.exhausted {
            warnings.push(DecompositionWarning::SiftIterationCap {
                imf_index: imfs.len(),
            });
        }
        if outcome.skipped_passes > 0 {
            warnings.push(DecompositionWarning::DegenerateDirections {
                imf_index: imfs.len(),
                skipped_passes: outcome.skipped_passes,
            });
        }
        for (res, imf) in residue.iter_mut().zip(&outcome.imf) {
            for (r, v) in res.iter_mut().zip(imf) {
                *r -= v;
            }
        }
        let row = outcome
            .imf
            .into_iter()
            .zip(record.channels())
            .map(|(samples, proto)| proto.with_samples(samples))
            .collect::<Result<Vec<_>>>()?;
        imfs.push(row);
    }
    let residue_series = residue
        .into_iter()
        .zip(record.channels())
        .map(|(samples, proto)| proto.with_samples(samples))
        .collect::<Result<Vec<_>>>()?;
    ImfSet::new(
        imfs,
        residue_series,
        record.channel_ids().to_vec(),
        warnings,
    )
}

/// Multivariate EMD. Single-channel records delegate to the univariate
/// decomposition; otherwise directions come from the low-discrepancy sphere
/// scheme with `config.rng_seed`.
pub fn memd_decompose(record: &MultichannelRecord, config: &DecompositionConfig) -> Result<ImfSet> {
    let n = record.n_channels();
    if n == 1 {
        let set = emd_decompose(record.channel(0), config)?;
        return ImfSet::new(
            set.imfs().to_vec(),
            set.residue().to_vec(),
            record.channel_ids().to_vec(),
            set.warnings().to_vec(),
        );
    }
    let count = config.effective_direction_count(n);
    let directions = generate_directions(
        n,
        count,
        DirectionScheme::LowDiscrepancySphere,
        config.rng_seed,
    )?;
    memd_decompose_with_directions(record, &directions, config)
}

/// Bivariate EMD: MEMD restricted to two channels with uniformly spaced
/// circle directions and the bivariate 2/K envelope scaling.
pub fn bemd_decompose(record: &MultichannelRecord, config: &DecompositionConfig) -> Result<ImfSet> {
    if record.n_channels() != 2 {
        return Err(Error::WrongChannelCount {
            expected: 2,
            actual: record.n_channels(),
        });
    }
    let count = config.effective_direction_count(2);
    let directions =
        generate_directions(2, count, DirectionScheme::UniformAngles2D, config.rng_seed)?;
    memd_decompose_with_directions(record, &directions, config)
}

/// Trivariate EMD: MEMD restricted to three channels with a polar-angle grid
/// direction set.
pub fn temd_decompose(record: &MultichannelRecord, config: &DecompositionConfig) -> Result<ImfSet> {
    if record.n_channels() != 3 {
        return Err(Error::WrongChannelCount {
            expected: 3,
            actual: record.n_channels(),
        });
    }
    let requested = config.effective_direction_count(3);
    let grid = (requested as f64).sqrt().ceil() as usize;
    let directions = generate_directions(
        3,
        grid * grid,
        DirectionScheme::PolarGrid3D,
        config.rng_seed,
    )?;
    memd_decompose_with_directions(record, &directions, config)
}

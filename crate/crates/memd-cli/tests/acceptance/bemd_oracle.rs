//! Literal bivariate EMD on the complex signal z(t) = a(t) + i b(t),
//! independent of the library's per-channel real machinery.
//!
//! Projections are Re(e^{-i phi_k} z), envelopes are complex splines through
//! the projection-maxima samples, and the envelope mean carries the bivariate
//! 2/K factor. Stop rules mirror the reconciled configuration under test:
//! the channel-averaged SD criterion with the same epsilon guard, two
//! mirrored knots per end, skipped directions reducing the mean divisor, and
//! the fewer-than-three-extrema outer stop.

use rustfft::num_complex::Complex64;

pub struct OracleParams {
    pub directions: usize,
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    pub max_imfs: usize,
}

pub struct OracleDecomposition {
    /// Per-IMF (channel a, channel b) sample vectors.
    pub imfs: Vec<(Vec<f64>, Vec<f64>)>,
    pub residue: (Vec<f64>, Vec<f64>),
}

pub fn bemd_literal(a: &[f64], b: &[f64], params: &OracleParams) -> OracleDecomposition {
    let mut residue: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let mut imfs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    while imfs.len() < params.max_imfs {
        if projections_exhausted(&residue, params.directions) {
            break;
        }
        let Some(imf) = sift(&residue, params) else {
            break;
        };
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(split(&imf));
    }
    OracleDecomposition {
        imfs,
        residue: split(&residue),
    }
}

fn split(z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (
        z.iter().map(|v| v.re).collect(),
        z.iter().map(|v| v.im).collect(),
    )
}

fn project(z: &[Complex64], phi: f64) -> Vec<f64> {
    // Re(e^{-i phi} z) = cos(phi) Re(z) + sin(phi) Im(z); evaluate the cosine
    // term first to match the channel-order accumulation under test.
    let (c, s) = (phi.cos(), phi.sin());
    z.iter().map(|v| c * v.re + s * v.im).collect()
}

/// Strict interior maxima; a plateau reports its first index.
fn maxima_times(p: &[f64]) -> Vec<i64> {
    let n = p.len();
    let mut out = Vec::new();
    let mut start = 0usize;
    while start < n {
        let mut end = start;
        while end + 1 < n && p[end + 1] == p[start] {
            end += 1;
        }
        if start > 0 && end + 1 < n && p[start - 1] < p[start] && p[end + 1] < p[start] {
            out.push(start as i64);
        }
        start = end + 1;
    }
    out
}

fn extrema_count(p: &[f64]) -> usize {
    let n = p.len();
    let mut count = 0usize;
    let mut start = 0usize;
    while start < n {
        let mut end = start;
        while end + 1 < n && p[end + 1] == p[start] {
            end += 1;
        }
        if start > 0 && end + 1 < n {
            let v = p[start];
            if (p[start - 1] < v && p[end + 1] < v) || (p[start - 1] > v && p[end + 1] > v) {
                count += 1;
            }
        }
        start = end + 1;
    }
    count
}

fn projections_exhausted(z: &[Complex64], k_dirs: usize) -> bool {
    (1..=k_dirs).all(|k| {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / k_dirs as f64;
        extrema_count(&project(z, phi)) < 3
    })
}

fn mirror_times(times: &[i64], t_last: i64) -> Vec<(i64, usize)> {
    const N_MIRROR: usize = 2;
    let first = times[0];
    let last = *times.last().unwrap();
    let mut out: Vec<(i64, usize)> = times
        .iter()
        .enumerate()
        .take(N_MIRROR.min(times.len()))
        .filter_map(|(i, &t)| (-t < first).then_some((-t, i)))
        .collect();
    out.sort_unstable();
    out.extend(times.iter().enumerate().map(|(i, &t)| (t, i)));
    let tail = times.len().saturating_sub(N_MIRROR);
    let mut right: Vec<(i64, usize)> = times
        .iter()
        .enumerate()
        .skip(tail)
        .filter_map(|(i, &t)| (2 * t_last - t > last).then_some((2 * t_last - t, i)))
        .collect();
    right.sort_unstable();
    out.extend(right);
    out
}

/// Natural cubic spline on complex knot values, solved with the textbook
/// alpha/l/mu/z recurrence (a different but equivalent elimination from the
/// implementation under test).
fn natural_spline_complex(xs: &[f64], ys: &[Complex64], eval_len: usize) -> Vec<Complex64> {
    let n = xs.len();
    if n == 2 {
        let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return (0..eval_len)
            .map(|t| ys[0] + slope * (t as f64 - xs[0]))
            .collect();
    }
    if n == 3 {
        let (x0, x1, x2) = (xs[0], xs[1], xs[2]);
        let d0 = (x0 - x1) * (x0 - x2);
        let d1 = (x1 - x0) * (x1 - x2);
        let d2 = (x2 - x0) * (x2 - x1);
        return (0..eval_len)
            .map(|t| {
                let x = t as f64;
                ys[0] * ((x - x1) * (x - x2) / d0)
                    + ys[1] * ((x - x0) * (x - x2) / d1)
                    + ys[2] * ((x - x0) * (x - x1) / d2)
            })
            .collect();
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        alpha[i] = (ys[i + 1] - ys[i]) * (3.0 / h[i]) - (ys[i] - ys[i - 1]) * (3.0 / h[i - 1]);
    }
    let mut l = vec![1.0f64; n];
    let mut mu = vec![0.0f64; n];
    let mut zv = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        l[i] = 2.0 * (xs[i + 1] - xs[i - 1]) - h[i - 1] * mu[i - 1];
        mu[i] = h[i] / l[i];
        zv[i] = (alpha[i] - zv[i - 1] * h[i - 1]) / l[i];
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut bcoef = vec![Complex64::new(0.0, 0.0); n - 1];
    let mut dcoef = vec![Complex64::new(0.0, 0.0); n - 1];
    for i in (0..n - 1).rev() {
        c[i] = zv[i] - c[i + 1] * mu[i];
        bcoef[i] = (ys[i + 1] - ys[i]) / h[i] - (c[i + 1] + c[i] * 2.0) * (h[i] / 3.0);
        dcoef[i] = (c[i + 1] - c[i]) / (3.0 * h[i]);
    }
    let mut out = Vec::with_capacity(eval_len);
    let mut seg = 0usize;
    for t in 0..eval_len {
        let x = t as f64;
        while seg + 2 < n && x > xs[seg + 1] {
            seg += 1;
        }
        let d = x - xs[seg];
        out.push(ys[seg] + bcoef[seg] * d + c[seg] * (d * d) + dcoef[seg] * (d * d * d));
    }
    out
}

/// Complex envelope mean with the bivariate 2/K factor; `None` when every
/// direction lacks two projection maxima.
fn envelope_mean(z: &[Complex64], k_dirs: usize) -> Option<Vec<Complex64>> {
    let t_len = z.len();
    let t_last = (t_len - 1) as i64;
    let mut sum = vec![Complex64::new(0.0, 0.0); t_len];
    let mut surviving = 0usize;
    for k in 1..=k_dirs {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / k_dirs as f64;
        let times = maxima_times(&project(z, phi));
        if times.len() < 2 {
            continue;
        }
        surviving += 1;
        let mirrored = mirror_times(&times, t_last);
        let xs: Vec<f64> = mirrored.iter().map(|&(t, _)| t as f64).collect();
        let ys: Vec<Complex64> = mirrored
            .iter()
            .map(|&(_, src)| z[times[src] as usize])
            .collect();
        let envelope = natural_spline_complex(&xs, &ys, t_len);
        for (acc, v) in sum.iter_mut().zip(&envelope) {
            *acc += v;
        }
    }
    if surviving == 0 {
        return None;
    }
    let scale = 2.0 / surviving as f64;
    for v in sum.iter_mut() {
        *v *= scale;
    }
    Some(sum)
}

fn sd_component(prev: impl Iterator<Item = f64> + Clone, curr: impl Iterator<Item = f64>) -> f64 {
    let samples: Vec<f64> = prev.clone().collect();
    let mean_sq = samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64;
    let eps = (1e-12 * mean_sq).max(1e-300);
    samples
        .iter()
        .zip(curr)
        .map(|(p, c)| {
            let d = c - p;
            d * d / (p * p + eps)
        })
        .sum()
}

fn sift(z: &[Complex64], params: &OracleParams) -> Option<Vec<Complex64>> {
    let mut current = z.to_vec();
    for iteration in 0..params.max_sift_iterations {
        let Some(mean) = envelope_mean(&current, params.directions) else {
            if iteration == 0 {
                return None;
            }
            return Some(current);
        };
        let next: Vec<Complex64> = current.iter().zip(&mean).map(|(v, m)| v - m).collect();
        let sd_re = sd_component(current.iter().map(|v| v.re), next.iter().map(|v| v.re));
        let sd_im = sd_component(current.iter().map(|v| v.im), next.iter().map(|v| v.im));
        let sd = (sd_re + sd_im) / 2.0;
        current = next;
        if sd <= params.sd_threshold {
            return Some(current);
        }
    }
    Some(current)
}

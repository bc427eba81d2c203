//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The quantitative scenarios are deterministic synthetic stand-ins whose
//! ground truth mirrors the mode inventories the tool is meant to recover:
//! a 3-channel record with shared 0.30/0.15 Hz modes plus a single-channel
//! 1.0 Hz mode, and a 12-channel record with one shared 0.20 Hz mode around
//! a step event.

mod bemd_oracle;

use std::path::PathBuf;
use std::process::Command;

use memd::*;

fn pass(criterion: usize, name: &str) {
    println!("ACCEPTANCE {criterion} ({name}): PASS");
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("memd-acceptance-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Three channels sharing 0.30 Hz and 0.15 Hz modes (channel 3 with weak
/// participation), a 1.0 Hz mode confined to channel 3, slow trends, and
/// 15 dB low-passed ambient noise.
fn european_scenario() -> ScenarioSpec {
    ScenarioSpec {
        n_channels: 3,
        modes: vec![
            ModeSpec {
                frequency_hz: 0.30,
                damping_ratio: 0.0,
                per_channel: vec![(1.0, 0.0), (0.8, 2.1), (0.18, 4.2)],
                onset_s: 0.0,
            },
            ModeSpec {
                frequency_hz: 0.15,
                damping_ratio: 0.0,
                per_channel: vec![(0.7, 0.5), (1.0, 2.6), (0.22, 1.3)],
                onset_s: 0.0,
            },
            ModeSpec {
                frequency_hz: 1.0,
                damping_ratio: 0.0,
                per_channel: vec![(0.0, 0.0), (0.0, 0.0), (0.8, 1.0)],
                onset_s: 0.0,
            },
        ],
        trend: vec![vec![0.0, 0.004], vec![0.1, -0.003], vec![-0.05, 0.002]],
        noise_snr_db: Some(15.0),
        noise_lowpass_hz: Some(0.5),
        step_event: None,
        duration_s: 300.0,
        sample_rate: 10.0,
        seed: 5,
    }
}

/// Twelve channels with one shared 0.20 Hz mode: sustained under ambient
/// conditions, re-excited as a damped ring-down by a generation-trip-style
/// step event at 125 s.
fn ei_scenario() -> ScenarioSpec {
    use rand::{Rng, SeedableRng};
    let n = 12usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let amps: Vec<f64> = (0..n).map(|_| 0.8 + 0.7 * rng.random::<f64>()).collect();
    let phases: Vec<f64> = (0..n)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    let steps: Vec<f64> = (0..n)
        .map(|_| -0.025 - 0.01 * rng.random::<f64>())
        .collect();
    ScenarioSpec {
        n_channels: n,
        modes: vec![
            ModeSpec {
                frequency_hz: 0.20,
                damping_ratio: 0.0,
                per_channel: amps.iter().zip(&phases).map(|(&a, &p)| (a, p)).collect(),
                onset_s: 0.0,
            },
            ModeSpec {
                frequency_hz: 0.20,
                damping_ratio: 0.015,
                per_channel: amps
                    .iter()
                    .zip(&phases)
                    .map(|(&a, &p)| (5.0 * a, p))
                    .collect(),
                onset_s: 125.0,
            },
        ],
        trend: (0..n)
            .map(|i| vec![0.0, -0.0001 * (i + 1) as f64])
            .collect(),
        noise_snr_db: Some(12.0),
        noise_lowpass_hz: None,
        step_event: Some(StepEvent {
            time_s: 125.0,
            magnitudes: steps,
        }),
        duration_s: 300.0,
        sample_rate: 10.0,
        seed: 11,
    }
}

fn random_scenario(n_channels: usize, n_samples: usize, seed: u64) -> ScenarioSpec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xACCE_0000 + seed);
    let n_modes = rng.random_range(2..=3);
    let modes = (0..n_modes)
        .map(|_| ModeSpec {
            frequency_hz: rng.random_range(0.08..2.0),
            damping_ratio: if rng.random::<f64>() < 0.3 { 0.01 } else { 0.0 },
            per_channel: (0..n_channels)
                .map(|_| {
                    (
                        rng.random_range(0.2..1.5),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect(),
            onset_s: 0.0,
        })
        .collect();
    let trend = (0..n_channels)
        .map(|_| vec![rng.random_range(-0.5..0.5), rng.random_range(-0.002..0.002)])
        .collect();
    ScenarioSpec {
        n_channels,
        modes,
        trend,
        noise_snr_db: Some(12.0),
        noise_lowpass_hz: None,
        step_event: None,
        duration_s: n_samples as f64 / 10.0,
        sample_rate: 10.0,
        seed,
    }
}

fn slice_record(record: &MultichannelRecord, lo: usize, hi: usize) -> MultichannelRecord {
    build_record(
        record
            .channels()
            .iter()
            .map(|c| c.samples()[lo..hi].to_vec())
            .collect(),
        record.sample_rate(),
        record.channel_ids().to_vec(),
    )
    .unwrap()
}

#[test]
fn criterion_01_reconstruction_identity() {
    let mut seed = 0u64;
    let mut checked = 0usize;
    for &n in &[1usize, 2, 3, 8, 12] {
        // Ten records per channel count; the larger records lean on the
        // shorter length to keep the criterion within its runtime budget.
        let lengths: Vec<usize> = if n <= 3 {
            [vec![500; 5], vec![3000; 5]].concat()
        } else {
            [vec![500; 8], vec![3000; 2]].concat()
        };
        for t_len in lengths {
            seed += 1;
            let scenario = random_scenario(n, t_len, seed);
            let (record, _) = generate(&scenario).unwrap();
            let config = DecompositionConfig {
                direction_count: Some((4 * n).max(16)),
                max_imfs: 6,
                ..DecompositionConfig::default()
            };
            let set = memd_decompose(&record, &config).unwrap();
            let reconstructed = set.reconstruct();
            for ch in 0..n {
                let original = record.channel(ch).samples();
                let diff: Vec<f64> = reconstructed
                    .channel(ch)
                    .samples()
                    .iter()
                    .zip(original)
                    .map(|(a, b)| a - b)
                    .collect();
                let rel = rms(&diff) / rms(original);
                assert!(
                    rel <= 1e-8,
                    "seed {seed} n {n} T {t_len} channel {ch}: relative rms {rel:e}"
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 50);
    pass(1, "reconstruction identity on 50 seeded records");
}

#[test]
fn criterion_02_single_channel_equivalence() {
    for seed in 0..20u64 {
        let scenario = random_scenario(1, if seed % 2 == 0 { 800 } else { 2000 }, 100 + seed);
        let (record, _) = generate(&scenario).unwrap();
        let config = DecompositionConfig::default();
        let via_memd = memd_decompose(&record, &config).unwrap();
        let via_emd = emd_decompose(record.channel(0), &config).unwrap();
        assert_eq!(via_memd.n_imfs(), via_emd.n_imfs(), "seed {seed}");
        let bits = |s: &[f64]| -> Vec<u64> { s.iter().map(|v| v.to_bits()).collect() };
        for m in 0..via_memd.n_imfs() {
            assert_eq!(
                bits(via_memd.imf(m).unwrap()[0].samples()),
                bits(via_emd.imf(m).unwrap()[0].samples()),
                "seed {seed} imf {m}"
            );
        }
        assert_eq!(
            bits(via_memd.residue()[0].samples()),
            bits(via_emd.residue()[0].samples()),
            "seed {seed} residue"
        );
    }
    pass(
        2,
        "single-channel MEMD bitwise-equals EMD on 20 seeded cases",
    );
}

#[test]
fn criterion_03_bemd_matches_literal_complex_procedure() {
    for seed in 0..10u64 {
        let scenario = random_scenario(2, 600, 300 + seed);
        let (record, _) = generate(&scenario).unwrap();
        let config = DecompositionConfig {
            direction_count: Some(16),
            ..DecompositionConfig::default()
        };
        let set = bemd_decompose(&record, &config).unwrap();
        let oracle = bemd_oracle::bemd_literal(
            record.channel(0).samples(),
            record.channel(1).samples(),
            &bemd_oracle::OracleParams {
                directions: 16,
                sd_threshold: config.sd_threshold,
                max_sift_iterations: config.max_sift_iterations,
                max_imfs: config.max_imfs,
            },
        );
        assert_eq!(set.n_imfs(), oracle.imfs.len(), "seed {seed}: imf counts");
        let mut max_diff = 0.0f64;
        for (m, (oracle_a, oracle_b)) in oracle.imfs.iter().enumerate() {
            let row = set.imf(m).unwrap();
            for (x, y) in row[0].samples().iter().zip(oracle_a) {
                max_diff = max_diff.max((x - y).abs());
            }
            for (x, y) in row[1].samples().iter().zip(oracle_b) {
                max_diff = max_diff.max((x - y).abs());
            }
        }
        for (x, y) in set.residue()[0].samples().iter().zip(&oracle.residue.0) {
            max_diff = max_diff.max((x - y).abs());
        }
        for (x, y) in set.residue()[1].samples().iter().zip(&oracle.residue.1) {
            max_diff = max_diff.max((x - y).abs());
        }
        assert!(max_diff <= 1e-10, "seed {seed}: max abs diff {max_diff:e}");
    }
    pass(
        3,
        "bivariate EMD matches the literal complex procedure on 10 cases",
    );
}

#[test]
fn criterion_04_pure_tone_hilbert() {
    let rate = 10.0;
    let t_len = 3000usize;
    let tone = TimeSeries::new(
        (0..t_len)
            .map(|i| (2.0 * std::f64::consts::PI * 0.3 * i as f64 / rate).sin())
            .collect(),
        rate,
        0.0,
    )
    .unwrap();
    let trace = analytic_trace(&tone).unwrap();
    let lo = t_len / 10;
    let hi = t_len * 9 / 10;
    for i in lo..hi {
        assert!(
            (trace.amplitude[i] - 1.0).abs() <= 0.01,
            "amplitude[{i}] = {}",
            trace.amplitude[i]
        );
    }
    let mut freqs: Vec<f64> = trace.inst_frequency[lo..hi]
        .iter()
        .copied()
        .filter(|f| f.is_finite())
        .collect();
    freqs.sort_by(f64::total_cmp);
    let median = freqs[freqs.len() / 2];
    assert!(
        (median - 0.3).abs() <= 0.02 * 0.3,
        "median instantaneous frequency {median}"
    );
    pass(4, "pure-tone amplitude within 1% and frequency within 2%");
}

struct EuropeanAnalysis {
    record: MultichannelRecord,
    truth: ScenarioSpec,
    set: ImfSet,
    ranking: ModeRanking,
}

fn analyze_european() -> EuropeanAnalysis {
    let (record, truth) = generate(&european_scenario()).unwrap();
    let config = DecompositionConfig::default();
    let set = memd_decompose(&record, &config).unwrap();
    let traces = ImfTraces::compute(&set).unwrap();
    let ranking = rank_modes(&set, &traces, &ClassifierConfig::default()).unwrap();
    EuropeanAnalysis {
        record,
        truth,
        set,
        ranking,
    }
}

#[test]
fn criterion_05_european_mode_inventory() {
    let analysis = analyze_european();
    let ranked = &analysis.ranking.ranked;
    assert!(ranked.len() >= 2, "need at least two ranked candidates");
    // The two dominant candidates are inter-area and sit on 0.30 and 0.15 Hz.
    let top: Vec<f64> = ranked[..2]
        .iter()
        .map(|c| {
            assert_eq!(c.classification, Classification::InterAreaCandidate);
            c.median_joint_frequency_hz.expect("defined frequency")
        })
        .collect();
    let (fast, slow) = if top[0] > top[1] {
        (top[0], top[1])
    } else {
        (top[1], top[0])
    };
    assert!((fast - 0.30).abs() <= 0.02, "fast mode at {fast}");
    assert!((slow - 0.15).abs() <= 0.02, "slow mode at {slow}");
    // The 1.0 Hz single-channel mode classifies as local.
    let recovery = recovery_report(&analysis.truth, ranked);
    let local = recovery
        .iter()
        .find(|r| r.truth_frequency_hz == 1.0)
        .and_then(|r| r.matched.as_ref())
        .expect("1.0 Hz mode recovered");
    assert_eq!(
        ranked[local.rank].classification,
        Classification::LocalMode,
        "1.0 Hz mode classification"
    );
    // The slow drift lands in trend-classified IMFs.
    let trends: Vec<&ModeCandidate> = analysis
        .ranking
        .excluded
        .iter()
        .filter(|c| c.classification == Classification::Trend)
        .collect();
    assert!(!trends.is_empty(), "no trend-classified IMF");
    for c in &analysis.ranking.excluded {
        if let Some(f) = c.median_joint_frequency_hz {
            if f < 0.05 {
                assert_eq!(
                    c.classification,
                    Classification::Trend,
                    "imf {}",
                    c.imf_index
                );
            }
        }
    }
    pass(
        5,
        "European-style inventory: 0.30/0.15 inter-area, 1.0 local, trend",
    );
}

#[test]
fn criterion_06_ei_ambient_event_consistency() {
    let (record, _) = generate(&ei_scenario()).unwrap();
    let rate = record.sample_rate();
    let event_at = (125.0 * rate) as usize;
    let config = DecompositionConfig::default();
    let thresholds = ClassifierConfig::default();
    let mut compass_phases: Vec<Vec<f64>> = Vec::new();
    for (tag, segment) in [
        ("ambient", slice_record(&record, 0, event_at)),
        ("event", slice_record(&record, event_at, record.len())),
    ] {
        let set = memd_decompose(&segment, &config).unwrap();
        let traces = ImfTraces::compute(&set).unwrap();
        let ranking = rank_modes(&set, &traces, &thresholds).unwrap();
        let top = &ranking.ranked[0];
        let freq = top.median_joint_frequency_hz.expect("defined frequency");
        assert!(
            (0.18..=0.22).contains(&freq),
            "{tag}: top candidate at {freq} Hz"
        );
        let duration = segment.len() as f64 / rate;
        let compass = mode_compass(top.imf_index, &set, &traces, (5.0, duration - 5.0)).unwrap();
        compass_phases.push(compass.iter().map(|s| s.phase_rad).collect());
    }
    let wrap = |x: f64| {
        let mut d = x % std::f64::consts::TAU;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        d
    };
    for (n, (&a, &b)) in compass_phases[0].iter().zip(&compass_phases[1]).enumerate() {
        let deg = wrap(a - b).abs().to_degrees();
        assert!(
            deg <= 15.0,
            "channel {n}: compass phases differ by {deg:.2} deg"
        );
    }
    pass(
        6,
        "EI-style 0.20 Hz mode consistent across ambient and event segments",
    );
}

#[test]
fn criterion_07_emd_mixing_memd_separation() {
    let analysis = analyze_european();
    let rate = analysis.record.sample_rate();
    // Channel 3 carries the weakest inter-area participation, making it the
    // noisiest observer of the shared modes.
    let noisy = 2usize;
    let band30 = (0.30 * 0.7, 0.30 * 1.3);
    let band15 = (0.15 * 0.7, 0.15 * 1.3);

    let config = DecompositionConfig::default();
    let univariate = emd_decompose(analysis.record.channel(noisy), &config).unwrap();
    let mixed = (0..univariate.n_imfs()).any(|m| {
        let samples = univariate.imf(m).unwrap()[0].samples();
        band_energy_fraction(samples, rate, band30.0, band30.1) > 0.30
            && band_energy_fraction(samples, rate, band15.0, band15.1) > 0.30
    });
    assert!(mixed, "univariate EMD failed to mix the 0.30/0.15 Hz modes");

    let recovery = recovery_report(&analysis.truth, &analysis.ranking.ranked);
    for (truth_freq, own) in [(0.30, band30), (0.15, band15)] {
        let matched = recovery
            .iter()
            .find(|r| r.truth_frequency_hz == truth_freq)
            .and_then(|r| r.matched.as_ref())
            .unwrap_or_else(|| panic!("{truth_freq} Hz mode missed"));
        let samples = analysis.set.imf(matched.imf_index).unwrap()[noisy].samples();
        let fraction = band_energy_fraction(samples, rate, own.0, own.1);
        assert!(
            fraction > 0.60,
            "{truth_freq} Hz: own-band fraction {fraction:.3} on the noisy channel"
        );
    }
    pass(7, "EMD mixes the close modes; MEMD separates them");
}

#[test]
fn criterion_08_fft_baseline_crest() {
    let (record, _) = generate(&ei_scenario()).unwrap();
    let bin = record.sample_rate() / record.len() as f64;
    let mut hits = 0usize;
    for ch in record.channels() {
        let spectrum = fft_amplitude_spectrum(ch, SpectrumWindow::Hann, true).unwrap();
        let crest = spectral_crest(&spectrum, (0.1, 1.0)).unwrap();
        if (crest.frequency_hz - 0.20).abs() <= bin + 1e-12 {
            hits += 1;
        }
    }
    assert!(
        hits >= 10,
        "crest within one bin of 0.20 Hz on {hits}/12 channels"
    );
    pass(8, "FFT crest near 0.20 Hz on at least 10 of 12 channels");
}

#[test]
fn criterion_09_energy_oracle_and_permutation() {
    use rand::{Rng, SeedableRng};
    let rate = 10.0;
    for seed in 0..20u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(900 + seed);
        let n = rng.random_range(1..=4usize);
        let t_len = rng.random_range(64..=512usize);
        let channels: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..t_len).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let mut oracle = 0.0f64;
        for ch in &channels {
            for &v in ch {
                oracle += v * v;
            }
        }
        let ids = (0..n).map(|i| format!("c{i}")).collect::<Vec<_>>();
        let row: Vec<TimeSeries> = channels
            .iter()
            .map(|c| TimeSeries::new(c.clone(), rate, 0.0).unwrap())
            .collect();
        let residue: Vec<TimeSeries> = (0..n)
            .map(|_| TimeSeries::new(vec![0.0; t_len], rate, 0.0).unwrap())
            .collect();
        let set = ImfSet::new(vec![row], residue.clone(), ids.clone(), vec![]).unwrap();
        let energy = imf_energy(0, &set).unwrap();
        assert!(
            (energy - oracle).abs() <= 1e-12 * oracle,
            "seed {seed}: {energy} vs {oracle}"
        );
        // Energy ranking is invariant under channel permutation.
        if n > 1 {
            let mut permuted = channels.clone();
            permuted.rotate_left(1);
            let row_p: Vec<TimeSeries> = permuted
                .iter()
                .map(|c| TimeSeries::new(c.clone(), rate, 0.0).unwrap())
                .collect();
            let set_p = ImfSet::new(vec![row_p], residue, ids, vec![]).unwrap();
            let energy_p = imf_energy(0, &set_p).unwrap();
            assert!((energy - energy_p).abs() <= 1e-12 * oracle);
        }
    }
    // Multi-IMF ranking order invariance under channel permutation.
    let (record, _) = generate(&european_scenario()).unwrap();
    let config = DecompositionConfig::default();
    let set = memd_decompose(&record, &config).unwrap();
    let energies: Vec<f64> = (0..set.n_imfs())
        .map(|m| imf_energy(m, &set).unwrap())
        .collect();
    let argsort = |values: &[f64]| -> Vec<usize> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        order
    };
    let permuted_set = ImfSet::new(
        set.imfs()
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.rotate_left(1);
                row
            })
            .collect(),
        {
            let mut r = set.residue().to_vec();
            r.rotate_left(1);
            r
        },
        set.channel_ids().to_vec(),
        vec![],
    )
    .unwrap();
    let permuted: Vec<f64> = (0..permuted_set.n_imfs())
        .map(|m| imf_energy(m, &permuted_set).unwrap())
        .collect();
    assert_eq!(argsort(&energies), argsort(&permuted));
    pass(
        9,
        "IMF energy matches the scalar-loop oracle; ranking permutation-invariant",
    );
}

#[test]
fn criterion_10_byte_identical_reports() {
    let dir = temp_dir("determinism");
    let scenario_text = "\
n_channels = 3
duration_s = 300
sample_rate = 10
seed = 5
snr_db = 15
noise_lowpass_hz = 0.5
trend.1 = 0.0,0.004
trend.2 = 0.1,-0.003
trend.3 = -0.05,0.002
mode.1.frequency_hz = 0.30
mode.1.amplitudes = 1.0,0.8,0.18
mode.1.phases_rad = 0.0,2.1,4.2
mode.2.frequency_hz = 0.15
mode.2.amplitudes = 0.7,1.0,0.22
mode.2.phases_rad = 0.5,2.6,1.3
mode.3.frequency_hz = 1.0
mode.3.amplitudes = 0.0,0.0,0.8
mode.3.phases_rad = 0.0,0.0,1.0
";
    let scenario_path = dir.join("euro.txt");
    std::fs::write(&scenario_path, scenario_text).unwrap();
    let bin = env!("CARGO_BIN_EXE_memd");
    let status = Command::new(bin)
        .args(["generate", "--input"])
        .arg(&scenario_path)
        .args(["--out-dir"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = dir.join("euro.csv");
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run{run}"));
        let status = Command::new(bin)
            .args(["analyze", "--input"])
            .arg(&csv)
            .args(["--out-dir"])
            .arg(&out)
            .args(["--emit-traces"])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert!(!reports[0].is_empty());
    assert_eq!(reports[0], reports[1], "reports differ between runs");
    pass(10, "two analyze runs produce byte-identical JSON");
}

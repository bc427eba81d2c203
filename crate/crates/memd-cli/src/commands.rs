//! Subcommand implementations: analyze, generate, compare, spectrum.

use std::path::{Path, PathBuf};

use memd::{
    fft_amplitude_spectrum, generate, memd_decompose, rank_modes, spectral_crest,
    AmplitudeSpectrum, Classification, ImfSet, ImfTraces, ModeRanking, MultichannelRecord,
    SpectrumWindow,
};

use crate::config::ToolConfig;
use crate::csvio::{ingest_csv, write_file, write_record_csv};
use crate::error::{CliError, CliResult};
use crate::report::{
    sig6, to_canonical_json, AnalysisReport, ChannelCrestEntry, CompareReport, ConfigEcho,
    CrestEntry, FftComparison, ImfSummaryEntry, MemdComparison, Metadata, ModeEntry, TraceEntry,
    SCHEMA_VERSION,
};

/// Crests whose peak-to-median ratio falls below this are flagged.
const LOW_PROMINENCE: f64 = 3.0;

fn record_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "record".to_string())
}

fn metadata(input: &Path, record: &MultichannelRecord, config: &ToolConfig) -> Metadata {
    Metadata {
        record_id: record_id(input),
        n_channels: record.n_channels(),
        n_samples: record.len(),
        sample_rate_hz: record.sample_rate(),
        t0_s: record.t0(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: ConfigEcho::new(
            &config.decomposition,
            &config.classifier,
            record.n_channels(),
        ),
    }
}

struct Analysis {
    set: ImfSet,
    traces: Option<ImfTraces>,
    ranking: ModeRanking,
    warnings: Vec<String>,
}

fn decompose_and_rank(record: &MultichannelRecord, config: &ToolConfig) -> CliResult<Analysis> {
    let set = memd_decompose(record, &config.decomposition)?;
    let mut warnings: Vec<String> = set.warnings().iter().map(|w| w.to_string()).collect();
    if set.n_imfs() == 0 {
        warnings.push("degenerate decomposition: no IMFs extracted".to_string());
        return Ok(Analysis {
            set,
            traces: None,
            ranking: ModeRanking {
                ranked: vec![],
                excluded: vec![],
            },
            warnings,
        });
    }
    warnings.push(format!(
        "instantaneous-frequency statistics exclude the first and last {:.0}% of samples (low confidence near record edges)",
        memd::hilbert::EDGE_FRACTION * 100.0
    ));
    let traces = ImfTraces::compute(&set)?;
    for (m, joint) in traces.joint.iter().enumerate() {
        let negatives = joint
            .interior_range()
            .filter(|&i| joint.joint_frequency[i] < 0.0)
            .count();
        if negatives > 0 {
            warnings.push(format!(
                "imf {}: joint instantaneous frequency has {negatives} negative excursion sample(s) (typical near low amplitude)",
                m + 1
            ));
        }
    }
    let ranking = rank_modes(&set, &traces, &config.classifier)?;
    Ok(Analysis {
        set,
        traces: Some(traces),
        ranking,
        warnings,
    })
}

fn mode_entries(candidates: &[memd::ModeCandidate], config: &ToolConfig) -> Vec<ModeEntry> {
    candidates
        .iter()
        .map(|c| ModeEntry::from_candidate(c, config.classifier.highlight_band_hz))
        .collect()
}

fn write_trace_csvs(out_dir: &Path, set: &ImfSet, traces: &ImfTraces) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    let t0 = set.residue()[0].t0();
    let rate = set.sample_rate();
    for m in 0..set.n_imfs() {
        let mut out = String::from("time");
        for id in set.channel_ids() {
            out.push_str(&format!(",{id}"));
        }
        out.push_str(",joint_frequency_hz,joint_amplitude\n");
        let joint = &traces.joint[m];
        let channels = set.imf(m).map_err(CliError::from)?;
        for i in 0..set.len() {
            out.push_str(&format!("{}", t0 + i as f64 / rate));
            for ch in channels {
                out.push_str(&format!(",{}", ch.samples()[i]));
            }
            out.push_str(&format!(
                ",{},{}\n",
                joint.joint_frequency[i], joint.joint_amplitude[i]
            ));
        }
        let path = out_dir.join(format!("imf_{:02}.csv", m + 1));
        write_file(&path, out.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn run_analyze(
    input: &Path,
    config: &ToolConfig,
    out_dir: &Path,
    emit_traces: bool,
) -> CliResult<u8> {
    let record = ingest_csv(input)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::write(format!("cannot create {}: {e}", out_dir.display())))?;
    let analysis = decompose_and_rank(&record, config)?;
    let trace_entries = match (&analysis.traces, emit_traces) {
        (Some(traces), true) => {
            write_trace_csvs(out_dir, &analysis.set, traces)?;
            Some(
                traces
                    .joint
                    .iter()
                    .enumerate()
                    .map(|(m, j)| TraceEntry {
                        imf_index: m + 1,
                        joint_frequency_hz: j.joint_frequency.clone(),
                        joint_amplitude: j.joint_amplitude.clone(),
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    let imf_summary = (0..analysis.set.n_imfs())
        .map(|m| {
            let joint = &analysis
                .traces
                .as_ref()
                .expect("traces exist when imfs exist")
                .joint[m];
            ImfSummaryEntry {
                imf_index: m + 1,
                energy: sig6(memd::imf_energy(m, &analysis.set).expect("index in range")),
                classification: classification_of(m, &analysis.ranking),
                median_joint_frequency_hz: joint
                    .median_interior_frequency()
                    .filter(|f| f.is_finite())
                    .map(sig6),
                mean_joint_amplitude: sig6(joint.mean_amplitude()),
            }
        })
        .collect();
    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION.to_string(),
        metadata: metadata(input, &record, config),
        imf_summary,
        ranked_modes: mode_entries(&analysis.ranking.ranked, config),
        excluded_modes: mode_entries(&analysis.ranking.excluded, config),
        traces: trace_entries,
        warnings: analysis.warnings.clone(),
    };
    write_file(
        &out_dir.join("report.json"),
        to_canonical_json(&report)?.as_bytes(),
    )?;
    Ok(if analysis.set.n_imfs() == 0 {
        crate::error::EXIT_DEGENERATE
    } else {
        0
    })
}

fn classification_of(imf_index: usize, ranking: &ModeRanking) -> String {
    ranking
        .ranked
        .iter()
        .chain(&ranking.excluded)
        .find(|c| c.imf_index == imf_index)
        .map(|c| c.classification.as_str().to_string())
        .unwrap_or_else(|| "Noise".to_string())
}

pub fn run_generate(
    scenario_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> CliResult<u8> {
    let mut scenario = crate::config::load_scenario(scenario_path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let (record, echo) = generate(&scenario)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::write(format!("cannot create {}: {e}", out_dir.display())))?;
    let stem = record_id(scenario_path);
    write_record_csv(&record, &out_dir.join(format!("{stem}.csv")))?;
    // Ground-truth echo: the scenario actually rendered, seed override and
    // all, in the same flat format generate accepts.
    write_file(
        &out_dir.join(format!("{stem}.effective.txt")),
        crate::config::scenario_to_flat(&echo).as_bytes(),
    )?;
    Ok(0)
}

fn crest_entry(spectrum: &AmplitudeSpectrum, band: (f64, f64)) -> Option<CrestEntry> {
    spectral_crest(spectrum, band).map(|c| CrestEntry {
        frequency_hz: sig6(c.frequency_hz),
        amplitude: sig6(c.amplitude),
        prominence: sig6(c.prominence),
        low_prominence: c.prominence < LOW_PROMINENCE,
    })
}

pub fn run_compare(
    input: &Path,
    config: &ToolConfig,
    out_dir: &Path,
    window: SpectrumWindow,
) -> CliResult<u8> {
    let record = ingest_csv(input)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::write(format!("cannot create {}: {e}", out_dir.display())))?;
    let analysis = decompose_and_rank(&record, config)?;
    let mut warnings = analysis.warnings.clone();

    let dominant = analysis
        .ranking
        .ranked
        .iter()
        .find(|c| c.classification == Classification::InterAreaCandidate);
    if dominant.is_none() {
        warnings.push("no inter-area candidate identified".to_string());
    }

    let band = config.classifier.highlight_band_hz;
    let mut per_channel = Vec::new();
    let mut pooled: Option<AmplitudeSpectrum> = None;
    for (ch, id) in record.channels().iter().zip(record.channel_ids()) {
        let spectrum = fft_amplitude_spectrum(ch, window, true)?;
        match &mut pooled {
            None => pooled = Some(spectrum.clone()),
            Some(acc) => {
                for (a, v) in acc.amplitudes.iter_mut().zip(&spectrum.amplitudes) {
                    *a += v;
                }
            }
        }
        let crest = crest_entry(&spectrum, band);
        if let Some(c) = &crest {
            if c.low_prominence {
                warnings.push(format!(
                    "channel {id}: spectral crest at {} Hz has low prominence",
                    c.frequency_hz
                ));
            }
        }
        per_channel.push(ChannelCrestEntry {
            channel_id: id.clone(),
            crest,
        });
    }
    let pooled_crest = pooled.map(|mut acc| {
        let n = record.n_channels() as f64;
        for a in acc.amplitudes.iter_mut() {
            *a /= n;
        }
        crest_entry(&acc, band)
    });

    let report = CompareReport {
        schema_version: SCHEMA_VERSION.to_string(),
        metadata: metadata(input, &record, config),
        memd: MemdComparison {
            method: if record.n_channels() == 1 {
                "emd (single channel)".to_string()
            } else {
                "memd".to_string()
            },
            dominant: dominant
                .map(|c| ModeEntry::from_candidate(c, config.classifier.highlight_band_hz)),
        },
        fft: FftComparison {
            window: match window {
                SpectrumWindow::Rectangular => "rectangular".to_string(),
                SpectrumWindow::Hann => "hann".to_string(),
            },
            band_hz: [band.0, band.1],
            pooled_crest: pooled_crest.flatten(),
            per_channel,
        },
        warnings,
    };
    write_file(
        &out_dir.join("compare.json"),
        to_canonical_json(&report)?.as_bytes(),
    )?;
    Ok(if analysis.set.n_imfs() == 0 {
        crate::error::EXIT_DEGENERATE
    } else {
        0
    })
}

pub fn run_spectrum(input: &Path, out_dir: &Path, window: SpectrumWindow) -> CliResult<u8> {
    let record = ingest_csv(input)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::write(format!("cannot create {}: {e}", out_dir.display())))?;
    let spectra: Vec<AmplitudeSpectrum> = record
        .channels()
        .iter()
        .map(|ch| fft_amplitude_spectrum(ch, window, true))
        .collect::<Result<_, _>>()?;
    let mut out = String::from("frequency_hz");
    for id in record.channel_ids() {
        out.push_str(&format!(",{id}"));
    }
    out.push('\n');
    for k in 0..spectra[0].frequencies.len() {
        out.push_str(&format!("{}", spectra[0].frequencies[k]));
        for spectrum in &spectra {
            out.push_str(&format!(",{}", spectrum.amplitudes[k]));
        }
        out.push('\n');
    }
    write_file(&out_dir.join("spectrum.csv"), out.as_bytes())?;
    for (spectrum, id) in spectra.iter().zip(record.channel_ids()) {
        if let Some(c) = spectral_crest(spectrum, (0.05, record.sample_rate() / 2.0)) {
            println!(
                "{id}: crest {:.6} Hz, amplitude {}",
                c.frequency_hz,
                sig6(c.amplitude)
            );
        }
    }
    Ok(0)
}

//! Flat key-value configuration files.
//!
//! Format: one `key = value` per line, `#` lines are comments, blank lines
//! ignored. The same parser reads analysis configuration and scenario files;
//! unknown keys are rejected so typos fail loudly instead of silently keeping
//! a default.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use memd::{ClassifierConfig, DecompositionConfig, ModeSpec, ScenarioSpec, StepEvent};

use crate::error::{CliError, CliResult};

pub struct FlatFile {
    entries: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
    source: String,
}

impl FlatFile {
    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "{source}:{}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), (value, lineno + 1)).is_some() {
                return Err(CliError::input(format!(
                    "{source}:{}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            entries,
            used: RefCell::new(BTreeSet::new()),
            source: source.to_string(),
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| {
            self.used.borrow_mut().insert(key.to_string());
            v.as_str()
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::input(format!(
                        "{}: key `{key}`: invalid number `{v}`",
                        self.source
                    ))
                })
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::input(format!(
                        "{}: key `{key}`: invalid integer `{v}`",
                        self.source
                    ))
                })
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    CliError::input(format!(
                        "{}: key `{key}`: invalid integer `{v}`",
                        self.source
                    ))
                })
            })
            .transpose()
    }

    pub fn get_f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim().parse::<f64>().map_err(|_| {
                            CliError::input(format!(
                                "{}: key `{key}`: invalid number `{}`",
                                self.source,
                                item.trim()
                            ))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Errors if any key was never consumed.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.entries.keys().filter(|k| !used.contains(*k)).collect();
        if let Some(first) = unknown.first() {
            let line = self.entries[*first].1;
            return Err(CliError::input(format!(
                "{}:{line}: unknown key `{first}`",
                self.source
            )));
        }
        Ok(())
    }
}

/// Analysis configuration: decomposition parameters plus classifier
/// thresholds, all optional with library defaults.
#[derive(Debug, Clone, Default)]
pub struct ToolConfig {
    pub decomposition: DecompositionConfig,
    pub classifier: ClassifierConfig,
}

pub fn parse_tool_config(file: &FlatFile) -> CliResult<ToolConfig> {
    let mut cfg = ToolConfig::default();
    if let Some(v) = file.get_f64("sd_threshold")? {
        cfg.decomposition.sd_threshold = v;
    }
    if let Some(v) = file.get_usize("direction_count")? {
        cfg.decomposition.direction_count = Some(v);
    }
    if let Some(v) = file.get_usize("max_sift_iterations")? {
        cfg.decomposition.max_sift_iterations = v;
    }
    if let Some(v) = file.get_usize("max_imfs")? {
        cfg.decomposition.max_imfs = v;
    }
    if let Some(v) = file.get_u64("rng_seed")? {
        cfg.decomposition.rng_seed = v;
    }
    if let Some(v) = file.get_f64("trend_max_frequency_hz")? {
        cfg.classifier.trend_max_frequency_hz = v;
    }
    if let Some(v) = file.get_f64("trend_max_phase_variance")? {
        cfg.classifier.trend_max_phase_variance = v;
    }
    if let Some(v) = file.get_f64("local_min_energy_share")? {
        cfg.classifier.local_min_energy_share = v;
    }
    if let Some(v) = file.get_f64("noise_min_frequency_hz")? {
        cfg.classifier.noise_min_frequency_hz = v;
    }
    if let Some(v) = file.get_f64("min_phase_coherence")? {
        cfg.classifier.min_phase_coherence = v;
    }
    if let Some(v) = file.get_f64("highlight_band_low_hz")? {
        cfg.classifier.highlight_band_hz.0 = v;
    }
    if let Some(v) = file.get_f64("highlight_band_high_hz")? {
        cfg.classifier.highlight_band_hz.1 = v;
    }
    if !cfg.decomposition.sd_threshold.is_finite() || cfg.decomposition.sd_threshold <= 0.0 {
        return Err(CliError::input("sd_threshold must be positive"));
    }
    file.finish()?;
    Ok(cfg)
}

pub fn load_tool_config(path: Option<&std::path::Path>) -> CliResult<ToolConfig> {
    match path {
        None => Ok(ToolConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
            let file = FlatFile::parse(&text, &p.display().to_string())?;
            parse_tool_config(&file)
        }
    }
}

/// Scenario file keys:
/// `n_channels`, `duration_s`, `sample_rate`, `seed`, optional `snr_db`,
/// `noise_lowpass_hz`, `step_time_s` + `step_magnitudes`, per-channel
/// `trend.<n> = c0,c1,...`, and per-mode `mode.<i>.frequency_hz`,
/// `mode.<i>.damping_ratio`, `mode.<i>.onset_s`, `mode.<i>.amplitudes`,
/// `mode.<i>.phases_rad`.
pub fn parse_scenario(file: &FlatFile) -> CliResult<ScenarioSpec> {
    let require = |key: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::input(format!("scenario is missing required key `{key}`")))
    };
    let n_channels = file
        .get_usize("n_channels")?
        .ok_or_else(|| CliError::input("scenario is missing required key `n_channels`"))?;
    let duration_s = require("duration_s", file.get_f64("duration_s")?)?;
    let sample_rate = require("sample_rate", file.get_f64("sample_rate")?)?;
    let seed = file.get_u64("seed")?.unwrap_or(0);
    let noise_snr_db = file.get_f64("snr_db")?;
    let noise_lowpass_hz = file.get_f64("noise_lowpass_hz")?;

    let step_time = file.get_f64("step_time_s")?;
    let step_magnitudes = file.get_f64_list("step_magnitudes")?;
    let step_event = match (step_time, step_magnitudes) {
        (Some(time_s), Some(magnitudes)) => Some(StepEvent { time_s, magnitudes }),
        (None, None) => None,
        _ => {
            return Err(CliError::input(
                "step_time_s and step_magnitudes must be given together",
            ))
        }
    };

    let mut trend = Vec::new();
    for n in 1..=n_channels {
        if let Some(coeffs) = file.get_f64_list(&format!("trend.{n}"))? {
            while trend.len() < n - 1 {
                trend.push(vec![]);
            }
            trend.push(coeffs);
        }
    }
    if !trend.is_empty() {
        while trend.len() < n_channels {
            trend.push(vec![]);
        }
    }

    let mut modes = Vec::new();
    for i in 1.. {
        let prefix = format!("mode.{i}");
        if !file.contains(&format!("{prefix}.frequency_hz")) {
            break;
        }
        let frequency_hz = require(
            &format!("{prefix}.frequency_hz"),
            file.get_f64(&format!("{prefix}.frequency_hz"))?,
        )?;
        let damping_ratio = file
            .get_f64(&format!("{prefix}.damping_ratio"))?
            .unwrap_or(0.0);
        let onset_s = file.get_f64(&format!("{prefix}.onset_s"))?.unwrap_or(0.0);
        let amplitudes = file
            .get_f64_list(&format!("{prefix}.amplitudes"))?
            .ok_or_else(|| CliError::input(format!("scenario is missing `{prefix}.amplitudes`")))?;
        let phases = file
            .get_f64_list(&format!("{prefix}.phases_rad"))?
            .unwrap_or_else(|| vec![0.0; amplitudes.len()]);
        if phases.len() != amplitudes.len() {
            return Err(CliError::input(format!(
                "`{prefix}`: amplitudes and phases_rad lengths differ"
            )));
        }
        modes.push(ModeSpec {
            frequency_hz,
            damping_ratio,
            per_channel: amplitudes.into_iter().zip(phases).collect(),
            onset_s,
        });
    }

    file.finish()?;
    Ok(ScenarioSpec {
        n_channels,
        modes,
        trend,
        noise_snr_db,
        noise_lowpass_hz,
        step_event,
        duration_s,
        sample_rate,
        seed,
    })
}

pub fn load_scenario(path: &std::path::Path) -> CliResult<ScenarioSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let file = FlatFile::parse(&text, &path.display().to_string())?;
    parse_scenario(&file)
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders a scenario back into the flat key-value format, so the effective
/// ground truth of a generation run (including seed overrides) can be saved
/// next to its CSV. Round-trips through [`parse_scenario`].
pub fn scenario_to_flat(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("n_channels = {}\n", spec.n_channels));
    out.push_str(&format!("duration_s = {}\n", spec.duration_s));
    out.push_str(&format!("sample_rate = {}\n", spec.sample_rate));
    out.push_str(&format!("seed = {}\n", spec.seed));
    if let Some(snr) = spec.noise_snr_db {
        out.push_str(&format!("snr_db = {snr}\n"));
    }
    if let Some(cutoff) = spec.noise_lowpass_hz {
        out.push_str(&format!("noise_lowpass_hz = {cutoff}\n"));
    }
    if let Some(step) = &spec.step_event {
        out.push_str(&format!("step_time_s = {}\n", step.time_s));
        out.push_str(&format!(
            "step_magnitudes = {}\n",
            join_floats(&step.magnitudes)
        ));
    }
    for (n, coeffs) in spec.trend.iter().enumerate() {
        if !coeffs.is_empty() {
            out.push_str(&format!("trend.{} = {}\n", n + 1, join_floats(coeffs)));
        }
    }
    for (i, mode) in spec.modes.iter().enumerate() {
        let prefix = format!("mode.{}", i + 1);
        out.push_str(&format!("{prefix}.frequency_hz = {}\n", mode.frequency_hz));
        out.push_str(&format!(
            "{prefix}.damping_ratio = {}\n",
            mode.damping_ratio
        ));
        out.push_str(&format!("{prefix}.onset_s = {}\n", mode.onset_s));
        let (amps, phases): (Vec<f64>, Vec<f64>) = mode.per_channel.iter().copied().unzip();
        out.push_str(&format!("{prefix}.amplitudes = {}\n", join_floats(&amps)));
        out.push_str(&format!("{prefix}.phases_rad = {}\n", join_floats(&phases)));
    }
    out
}

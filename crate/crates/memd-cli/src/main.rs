//! Oscillation-mode analysis for multichannel ambient measurements.
//!
//! Subcommands: `analyze` decomposes a CSV record and writes a JSON report,
//! `generate` renders a synthetic scenario to CSV, `compare` puts the
//! decomposition's dominant mode side by side with the FFT spectral crest,
//! and `spectrum` emits per-channel single-sided amplitude spectra.

mod commands;
mod config;
mod csvio;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use memd::SpectrumWindow;

use crate::config::{load_tool_config, ToolConfig};
use crate::error::CliResult;

#[derive(Parser)]
#[command(
    name = "memd",
    version,
    about = "Multichannel oscillation-mode analysis via empirical mode decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowArg {
    Rect,
    Hann,
}

impl From<WindowArg> for SpectrumWindow {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Rect => SpectrumWindow::Rectangular,
            WindowArg::Hann => SpectrumWindow::Hann,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a CSV record and write report.json (optionally trace CSVs).
    Analyze {
        /// Input CSV: header `time,<id1>,...`, time in seconds.
        #[arg(long)]
        input: PathBuf,
        /// Flat key-value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write per-IMF trace CSVs and embed joint traces in the report.
        #[arg(long)]
        emit_traces: bool,
        /// Override the direction-generation seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Render a scenario file to CSV in the ingest format.
    Generate {
        /// Scenario file (flat key-value).
        #[arg(long)]
        input: PathBuf,
        /// Output directory; the CSV takes the scenario file's stem.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Compare the decomposition's dominant mode with the FFT crest.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Spectral window for the FFT side.
        #[arg(long, value_enum, default_value = "hann")]
        window: WindowArg,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Write per-channel single-sided amplitude spectra to spectrum.csv.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "hann")]
        window: WindowArg,
    },
}

fn load_config_with_seed(
    config: Option<&PathBuf>,
    seed_override: Option<u64>,
) -> CliResult<ToolConfig> {
    let mut cfg = load_tool_config(config.map(|p| p.as_path()))?;
    if let Some(seed) = seed_override {
        cfg.decomposition.rng_seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Analyze {
            input,
            config,
            out_dir,
            emit_traces,
            seed_override,
        } => {
            let cfg = load_config_with_seed(config.as_ref(), seed_override)?;
            commands::run_analyze(&input, &cfg, &out_dir, emit_traces)
        }
        Command::Generate {
            input,
            out_dir,
            seed_override,
        } => commands::run_generate(&input, &out_dir, seed_override),
        Command::Compare {
            input,
            config,
            out_dir,
            window,
            seed_override,
        } => {
            let cfg = load_config_with_seed(config.as_ref(), seed_override)?;
            commands::run_compare(&input, &cfg, &out_dir, window.into())
        }
        Command::Spectrum {
            input,
            out_dir,
            window,
        } => commands::run_spectrum(&input, &out_dir, window.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

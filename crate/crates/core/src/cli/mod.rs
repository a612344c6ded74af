//! Command-line front end: `sbts run` and `sbts compare`.

pub mod config;
pub mod export;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{
    load_config_file, parse_config, CompareSpec, ConfigError, ConfigValues, ModelKind,
};
pub use export::{
    read_curves_csv, read_summary_json, write_curves_csv, write_onsets_csv, write_summary_json,
    ManifestRun, RunManifest, SummaryDocument,
};

use crate::harness::{run_cohort, summarize, ExperimentConfig, MetricsAggregate, SummaryRow};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sbts",
    version,
    about = "Skill-based task selection simulator",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one student model
    Run(RunArgs),
    /// Simulate labeled configurations from one file and compare them
    Compare(CompareArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub values: ConfigValues,
    /// Flat key/value config file (TOML, or JSON by extension)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "sbts-out")]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub values: ConfigValues,
    /// Comparison file with a `baseline` label and [[runs]] tables
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "sbts-out")]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// What a finished command produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<SummaryRow>,
    pub outputs: Vec<PathBuf>,
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Run(args) => {
            let config = parse_config(&args.values, args.config.as_deref())?;
            run_labeled(vec![("run".to_string(), config)], "run", &args.out, true)
        }
        Command::Compare(args) => {
            let spec = CompareSpec::load(&args.config)?;
            let configs = spec.resolve(&args.values)?;
            run_labeled(configs, &spec.baseline, &args.out, false)
        }
    }
}

fn create_dir(dir: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| crate::Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run_labeled(
    configs: Vec<(String, ExperimentConfig)>,
    baseline: &str,
    out: &Path,
    single: bool,
) -> Result<Report, CliError> {
    let started = Instant::now();
    create_dir(out)?;

    let mut outputs = Vec::new();
    let mut aggregates: Vec<(String, MetricsAggregate)> = Vec::with_capacity(configs.len());
    for (label, config) in &configs {
        let aggregate = run_cohort(config)?;
        let (curves, onsets) = if single {
            (out.join("curves.csv"), out.join("onsets.csv"))
        } else {
            (
                out.join(format!("{label}.curves.csv")),
                out.join(format!("{label}.onsets.csv")),
            )
        };
        write_curves_csv(&aggregate, &curves)?;
        write_onsets_csv(&aggregate, &onsets)?;
        outputs.extend([curves, onsets]);
        aggregates.push((label.clone(), aggregate));
    }

    if single {
        let path = out.join("config.toml");
        let text = toml::to_string(&ConfigValues::from_config(&configs[0].1))
            .expect("config values serialize");
        std::fs::write(&path, text).map_err(|source| crate::Error::Io {
            path: path.clone(),
            source,
        })?;
        outputs.push(path);
    }

    let rows = summarize(&aggregates, baseline)?;
    let summary = out.join("summary.json");
    outputs.push(summary.clone());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: configs[0].1.master_seed,
        runs: configs
            .iter()
            .map(|(label, config)| ManifestRun {
                label: label.clone(),
                config: ConfigValues::from_config(config),
            })
            .collect(),
        outputs: outputs.clone(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    write_summary_json(&rows, &manifest, &summary)?;
    Ok(Report { rows, outputs })
}

/// Fixed-width text rendering of a comparison table.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
    let mut text = format!(
        "{:<width$}  {:>8}  {:>8}  {:>9}\n",
        "label", "mean", "std", "change"
    );
    for row in rows {
        text.push_str(&format!(
            "{:<width$}  {:>8.3}  {:>8.3}  {:>+8.1}%\n",
            row.label, row.expected_level_mean, row.expected_level_std, row.pct_change_vs_baseline
        ));
    }
    text
}

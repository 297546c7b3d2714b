//! Batch runner for the bldlab experiments.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use config::Config;
use report::{render, Format, Record};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("malformed config {0}: {1}")]
    Config(PathBuf, String),
    #[error("config is missing {0}")]
    Missing(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bldlab::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_path: String,
    pub config: Config,
    pub seed: u64,
    pub format: Format,
    pub versions: Versions,
    pub map: Option<String>,
    pub rows: usize,
    pub report: String,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub bldlab: &'static str,
    pub bldlab_cli: &'static str,
}

pub struct RunOutcome {
    pub report_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
}

fn finish<R: Record>(rows: Vec<R>, format: Format) -> Result<(String, usize), CliError> {
    let n = rows.len();
    Ok((render(&rows, format)?, n))
}

/// Runs one experiment and returns the rendered report and its row count.
pub fn render_experiment(name: &str, cfg: &Config, base: &Path, seed: u64, format: Format) -> Result<(String, usize), CliError> {
    use experiments::*;
    match name {
        "equidist" => finish(equidist(cfg)?, format),
        "coarea" => finish(coarea(cfg)?, format),
        "flatnorm" => finish(flatnorm(cfg, base)?, format),
        "pullback" => finish(pullback(cfg, base)?, format),
        "duality" => finish(duality(cfg, base, seed)?, format),
        "separation" => finish(separation(cfg, base)?, format),
        "homology" => finish(homology(cfg, base)?, format),
        "qvalued" => finish(qvalued(cfg, seed)?, format),
        "filling" => finish(filling(cfg, base, seed)?, format),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

/// Loads the config, runs the experiment and writes `<name>.<ext>` plus `<name>.manifest.json` into `out`.
pub fn run_experiment(name: &str, config_path: &Path, out: &Path, format: Format, seed_override: Option<u64>) -> Result<RunOutcome, CliError> {
    if !experiments::NAMES.contains(&name) {
        return Err(CliError::UnknownExperiment(name.to_string()));
    }
    let start = Instant::now();
    let mut cfg = Config::load(config_path)?;
    if let Some(s) = seed_override {
        cfg.experiment.seed = Some(s);
    }
    let seed = cfg.seed()?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let (text, rows) = render_experiment(name, &cfg, base, seed, format)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let report_path = out.join(format!("{name}.{}", format.extension()));
    std::fs::write(&report_path, text).map_err(|e| CliError::Io(report_path.clone(), e))?;
    let manifest = Manifest {
        experiment: name.to_string(),
        config_path: config_path.display().to_string(),
        map: experiments::describe_map(&cfg),
        config: cfg,
        seed,
        format,
        versions: Versions {
            bldlab: bldlab::VERSION,
            bldlab_cli: env!("CARGO_PKG_VERSION"),
        },
        rows,
        report: report_path.display().to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let manifest_path = out.join(format!("{name}.manifest.json"));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(&manifest_path, text).map_err(|e| CliError::Io(manifest_path.clone(), e))?;
    Ok(RunOutcome {
        report_path,
        manifest_path,
        rows,
    })
}

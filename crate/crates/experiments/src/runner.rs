use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Config, ConfigError, ExperimentId};
use crate::experiments;
use crate::output::{emit_csv, OutputDigest, RunManifest, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    InvalidConfig(#[from] ConfigError),
    #[error("i/o failure at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Model(#[from] gcfk_core::Error),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Everything needed to execute one experiment.
#[derive(Clone, Debug)]
pub struct RunRequest {
    pub experiment: ExperimentId,
    pub config: Config,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl RunRequest {
    /// Resolves command-line overrides against the configuration. The seed
    /// must come from one of the two, and a configuration naming a
    /// different experiment is rejected.
    pub fn resolve(
        experiment: ExperimentId,
        config: Config,
        seed: Option<u64>,
        out_dir: Option<PathBuf>,
        workers: Option<usize>,
    ) -> Result<Self, ConfigError> {
        if let Some(in_file) = config.experiment {
            if in_file != experiment {
                return Err(ConfigError::ExperimentMismatch {
                    in_file: in_file.to_string(),
                    requested: experiment.to_string(),
                });
            }
        }
        let seed = seed.or(config.seed).ok_or(ConfigError::MissingSeed)?;
        let out_dir = out_dir
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| default_output_root().join(experiment.as_str()));
        Ok(RunRequest { experiment, config, seed, out_dir, workers })
    }
}

/// Computes the tables of one experiment without touching the disk.
pub fn compute_tables(experiment: ExperimentId, config: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    config.validate()?;
    let mut tables = experiments::run(experiment, config, seed)?;
    let tag = format!("{experiment}: {}; seed {seed}", experiment.describes());
    for t in &mut tables {
        t.comment = if t.comment.is_empty() { tag.clone() } else { format!("{tag}\n{}", t.comment) };
    }
    Ok(tables)
}

/// Runs the experiment, writes one CSV per table plus `manifest.json`.
pub fn run_experiment(req: &RunRequest) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    let tables = match req.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?
            .install(|| compute_tables(req.experiment, &req.config, req.seed))?,
        None => compute_tables(req.experiment, &req.config, req.seed)?,
    };
    fs::create_dir_all(&req.out_dir).map_err(io_err(&req.out_dir))?;
    let mut outputs = Vec::with_capacity(tables.len());
    for t in &tables {
        let file = format!("{}.csv", t.name);
        let path = req.out_dir.join(&file);
        let sha256 = emit_csv(t, &path).map_err(io_err(&path))?;
        outputs.push(OutputDigest { file, sha256, rows: t.rows.len() });
    }
    let manifest = RunManifest {
        experiment: req.experiment.to_string(),
        describes: req.experiment.describes().to_string(),
        config_digest: req.config.digest(),
        seed: req.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        workers: req.workers.unwrap_or_else(rayon::current_num_threads),
        outputs,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    manifest.write(&req.out_dir).map_err(io_err(&req.out_dir))?;
    Ok(manifest)
}

/// Output root: `GCFK_OUT` if set, else `gcfk-out` in the working directory.
pub fn default_output_root() -> PathBuf {
    std::env::var_os("GCFK_OUT").map_or_else(|| PathBuf::from("gcfk-out"), PathBuf::from)
}

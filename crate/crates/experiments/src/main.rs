use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcfk_experiments::config::{validate_config, Config, ExperimentId};
use gcfk_experiments::output::{verify, FileCheck};
use gcfk_experiments::runner::{run_experiment, RunError, RunRequest};

#[derive(Parser)]
#[command(name = "gcfk", version, about = "Run the metric-gaming experiments and check their outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSVs plus manifest.json.
    Run {
        experiment: ExperimentId,
        /// TOML configuration; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (default: <GCFK_OUT or gcfk-out>/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Reject unknown configuration keys instead of warning.
        #[arg(long)]
        strict: bool,
    },
    /// List experiment ids and what each produces.
    List,
    /// Recompute the digests recorded in a manifest.
    Verify { manifest: PathBuf },
}

fn load_config(path: Option<&PathBuf>, strict: bool) -> Result<Config, RunError> {
    let Some(path) = path else { return Ok(Config::default()) };
    let raw = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
    let v = validate_config(&raw, strict)?;
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    Ok(v.config)
}

fn run(
    experiment: ExperimentId,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    strict: bool,
) -> Result<(), RunError> {
    let config = load_config(config.as_ref(), strict)?;
    let req = RunRequest::resolve(experiment, config, seed, out, workers)?;
    let manifest = run_experiment(&req)?;
    for o in &manifest.outputs {
        println!("{}  {} ({} rows)", o.sha256, req.out_dir.join(&o.file).display(), o.rows);
    }
    Ok(())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { experiment, config, out, seed, workers, strict } => {
            match run(experiment, config, out, seed, workers, strict) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{:<24}{}", id.as_str(), id.describes());
            }
            ExitCode::SUCCESS
        }
        Command::Verify { manifest } => match verify(&manifest) {
            Ok(checks) => {
                let mut ok = true;
                for (file, check) in checks {
                    match check {
                        FileCheck::Ok => println!("ok        {file}"),
                        FileCheck::Mismatch { expected, found } => {
                            ok = false;
                            println!("MISMATCH  {file} expected {expected} found {found}");
                        }
                        FileCheck::Missing => {
                            ok = false;
                            println!("MISSING   {file}");
                        }
                    }
                }
                if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE }
            }
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", manifest.display());
                ExitCode::FAILURE
            }
        },
    }
}

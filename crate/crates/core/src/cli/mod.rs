//! Command-line front end. Each run reads one TOML experiment file, writes
//! its outputs to a directory and finishes with a `manifest.json` listing
//! them.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, CommandOutput};
pub use config::{EnvironmentSection, Experiment, ExperimentConfig, FluxSource, InitialState, OutputSection, PdeMethod, PdeSection};
pub use manifest::{self_check, write_run, ManifestEntry, OutputFile, RunManifest, SelfCheck, MANIFEST_NAME};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "zrplab", version, about = "Disordered zero-range and K-exclusion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to ZRPLAB_OUT, then the config.
    #[arg(long, env = "ZRPLAB_OUT")]
    out: Option<PathBuf>,
    /// Exit with status 2 when an acceptance check fails.
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    Equilibria(RunArgs),
    Simulate(RunArgs),
    Hydro(RunArgs),
    Pde(RunArgs),
    Oracle(RunArgs),
    Graph(RunArgs),
    /// Verifies that every file under the output directory belongs to exactly one manifest.
    Selfcheck {
        #[arg(long, env = "ZRPLAB_OUT")]
        out: PathBuf,
    },
}

/// Outcome of [`run_config`].
#[derive(Clone, Debug)]
pub struct RunResult {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub checks: Vec<(String, bool)>,
}

/// Runs `config` as `subcommand` and writes its outputs under `dir`.
pub fn run_config(subcommand: &str, config: &ExperimentConfig, dir: &Path) -> Result<RunResult> {
    if config.experiment.subcommand() != subcommand {
        return Err(Error::Config(format!(
            "experiment runs under `{}`, not `{subcommand}`",
            config.experiment.subcommand()
        )));
    }
    let start = Instant::now();
    let output = execute(config)?;
    let base = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: subcommand.to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: Vec::new(),
        seeds: output.seeds.clone(),
        check_passed: (!output.checks.is_empty()).then(|| output.checks_passed()),
    };
    let manifest = write_run(dir, &output.files, base)?;
    Ok(RunResult {
        dir: dir.to_path_buf(),
        manifest,
        checks: output.checks,
    })
}

fn run_args(subcommand: &str, args: RunArgs) -> Result<(RunResult, bool)> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let dir = args
        .out
        .or_else(|| config.output.dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out, set ZRPLAB_OUT or [output].dir".into()))?;
    Ok((run_config(subcommand, &config, &dir)?, args.check))
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
        }
    };
    let (name, args) = match cli.command {
        Command::Selfcheck { out } => {
            return match self_check(&out) {
                Ok(report) => {
                    for p in &report.problems {
                        eprintln!("{p}");
                    }
                    println!(
                        "{} manifests, {} files, {} problems",
                        report.manifests,
                        report.files,
                        report.problems.len()
                    );
                    if report.passed() {
                        EXIT_OK
                    } else {
                        EXIT_CHECK_FAILED
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_PRECONDITION
                }
            };
        }
        Command::Equilibria(a) => ("equilibria", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Hydro(a) => ("hydro", a),
        Command::Pde(a) => ("pde", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Graph(a) => ("graph", a),
    };
    match run_args(name, args) {
        Ok((result, check)) => {
            for f in &result.manifest.outputs {
                println!("wrote {} ({} rows)", result.dir.join(&f.file).display(), f.rows);
            }
            for (what, ok) in &result.checks {
                println!("[{}] {what}", if *ok { "pass" } else { "FAIL" });
            }
            if check && result.checks.iter().any(|c| !c.1) {
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_PRECONDITION
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

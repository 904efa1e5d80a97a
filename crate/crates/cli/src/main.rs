//! Command-line front end: `ccnode run <config.json> [--out DIR] [--fixed-dt X] [--samples N]`.

mod config;
mod error;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ccnode", version, about = "Crossed-cavity photon router and two-node network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration file and write trajectory.csv and summary.json.
    Run {
        config: PathBuf,
        /// output directory, created if missing
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// use the fixed-step integrator with this step
        #[arg(long)]
        fixed_dt: Option<f64>,
        /// number of uniformly spaced output samples
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("CCNODE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::config("CCNODE_THREADS", format!("must be a positive integer, got \"{v}\""))),
        },
    }
}

fn run(config: &Path, out: &Path, fixed_dt: Option<f64>, samples: Option<usize>) -> Result<(), CliError> {
    let cfg = Config::load(config)?;
    let mut integrator = cfg.integrator;
    if let Some(dt) = fixed_dt {
        integrator.fixed_dt = Some(dt);
        integrator.rtol = None;
        integrator.atol = None;
    }
    if samples.is_some() {
        integrator.samples = samples;
    }
    let opts = integrator.options()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::config("CCNODE_THREADS", e.to_string()))?;
    let outcome = pool.install(|| run::execute(&cfg, &opts))?;

    std::fs::create_dir_all(out).map_err(|e| CliError::Io { path: out.to_path_buf(), source: e })?;
    if let Some(tr) = &outcome.trajectory {
        output::write(&out.join("trajectory.csv"), &output::trajectory_csv(tr))?;
    }
    if let Some(table) = &outcome.sweep {
        output::write(&out.join("sweep.csv"), &output::sweep_csv(table))?;
    }
    output::write_json(&out.join("summary.json"), &outcome.summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, fixed_dt, samples } = cli.command;
    match run(&config, &out, fixed_dt, samples) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ccnode: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

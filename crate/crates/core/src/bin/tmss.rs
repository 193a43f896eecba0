//! Command-line experiment runner.
//!
//! `tmss run <experiment>` executes one experiment from the library and
//! writes its data files plus a `run.json` manifest. Exit codes: 0 on
//! success, 2 for configuration problems, 3 when a numerical guard aborts
//! a run. Diagnostics go to stderr as single-line JSON.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use tmss_core::config::{OutputFormat, RunConfig};
use tmss_core::experiments::{self, Experiment};
use tmss_core::Error;

#[derive(Parser)]
#[command(name = "tmss", version, about = "Two-mode squeezed state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its data files.
    Run {
        /// Experiment name; see `tmss list`.
        experiment: String,
        /// Config file (TOML). Falls back to $TMSS_CONFIG_DIR/tmss.toml,
        /// then to built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Data file format override.
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Seed override for experiments with shot sampling.
        #[arg(long)]
        seed: Option<u64>,
        /// Squeezing parameter override where the experiment takes one.
        #[arg(long)]
        r: Option<f64>,
    },
    /// List the available experiments.
    List,
}

fn main() {
    env_logger::init();
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{}", e.name());
            }
            0
        }
        Command::Run {
            experiment,
            config,
            out,
            format,
            seed,
            r,
        } => {
            let experiment = match Experiment::from_name(&experiment) {
                Ok(e) => e,
                Err(e) => return fail(&e),
            };
            let mut cfg = match RunConfig::load(config.as_deref()) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(out) = out {
                cfg.output.directory = out;
            }
            if let Some(format) = format {
                cfg.output.format = format;
            }
            if let Some(seed) = seed {
                cfg.probe_scan.seed = seed;
            }
            if let Some(r) = r {
                cfg.populations_wigner.r = r;
                cfg.probe_scan.r = r;
            }
            match experiments::run_experiment(experiment, &cfg) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    0
                }
                Err(e) => fail(&e),
            }
        }
    }
}

/// One machine-parsable diagnostic line on stderr, then the exit code the
/// error class maps to.
fn fail(e: &Error) -> i32 {
    let class = if e.is_numerical_guard() {
        "numerical"
    } else {
        "config"
    };
    let line = serde_json::json!({ "error": class, "message": e.to_string() });
    eprintln!("{line}");
    if e.is_numerical_guard() {
        3
    } else {
        2
    }
}
